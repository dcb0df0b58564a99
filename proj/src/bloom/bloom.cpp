#include "ogb/bloom/bloom.hpp"

#include <sodium.h>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ogb::bloom {

BloomParams
params_for(std::size_t expected, double fp_rate)
{
  if (expected == 0 || fp_rate <= 0 || fp_rate >= 1)
    throw std::invalid_argument("bloom: need expected > 0 and 0 < fp < 1");
  double ln2 = std::log(2.0);
  double m = std::ceil(-static_cast<double>(expected) * std::log(fp_rate) / (ln2 * ln2));
  double h = std::round(m / static_cast<double>(expected) * ln2);
  return {static_cast<std::uint32_t>(m), static_cast<std::uint32_t>(std::max(1.0, h))};
}

double
analytic_fp(const BloomParams& p, std::size_t n)
{
  double h = p.h;
  return std::pow(1.0 - std::exp(-h * static_cast<double>(n) / p.m), h);
}

std::string
bloom_key(const geo::TileId& tile, const std::string& tid, const std::string& cid)
{
  return geo::tile_prefix(tile).to_uri() + "|" + tid + "|" + cid;
}

namespace {

const unsigned char kKey1[crypto_shorthash_KEYBYTES] = {'o', 'g', 'b', '-', 'b', 'l', 'o', 'o',
                                                        'm', '-', 'k', 'e', 'y', '-', '0', '1'};
const unsigned char kKey2[crypto_shorthash_KEYBYTES] = {'o', 'g', 'b', '-', 'b', 'l', 'o', 'o',
                                                        'm', '-', 'k', 'e', 'y', '-', '0', '2'};

std::uint64_t
siphash(std::string_view key, const unsigned char* k)
{
  unsigned char out[crypto_shorthash_BYTES];
  crypto_shorthash(out, reinterpret_cast<const unsigned char*>(key.data()), key.size(), k);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v |= static_cast<std::uint64_t>(out[i]) << (8 * i);
  return v;
}

} // namespace

std::vector<std::uint32_t>
buckets(const BloomParams& p, std::string_view key)
{
  auto h1 = siphash(key, kKey1);
  auto h2 = siphash(key, kKey2) | 1;
  std::vector<std::uint32_t> out(p.h);
  for (std::uint32_t i = 0; i < p.h; ++i)
    out[i] = static_cast<std::uint32_t>((h1 + i * h2) % p.m);
  return out;
}

BloomFilter::BloomFilter(BloomParams p)
  : m_params(p)
  , m_bits(p.m, false)
{
}

void
BloomFilter::insert(std::string_view key)
{
  for (auto b : buckets(m_params, key))
    m_bits[b] = true;
}

bool
BloomFilter::contains(std::string_view key) const
{
  for (auto b : buckets(m_params, key))
    if (!m_bits[b])
      return false;
  return true;
}

std::size_t
BloomFilter::popcount() const
{
  std::size_t n = 0;
  for (bool b : m_bits)
    n += b;
  return n;
}

CountingBloomFilter::CountingBloomFilter(BloomParams p)
  : m_params(p)
  , m_nibbles((p.m + 1) / 2, 0)
{
}

std::uint8_t
CountingBloomFilter::count(std::uint32_t bucket) const
{
  auto byte = m_nibbles.at(bucket / 2);
  return bucket % 2 ? byte >> 4 : byte & 0x0f;
}

void
CountingBloomFilter::set(std::uint32_t bucket, std::uint8_t v)
{
  auto& byte = m_nibbles.at(bucket / 2);
  if (bucket % 2)
    byte = static_cast<std::uint8_t>((byte & 0x0f) | (v << 4));
  else
    byte = static_cast<std::uint8_t>((byte & 0xf0) | v);
}

std::vector<Transition>
CountingBloomFilter::insert(std::string_view key)
{
  std::vector<Transition> out;
  auto bs = buckets(m_params, key);
  std::sort(bs.begin(), bs.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
  for (auto b : bs) {
    auto c = count(b);
    if (c == kMaxCount)
      continue;
    set(b, c + 1);
    if (c == 0)
      out.push_back({b, true});
  }
  return out;
}

std::vector<Transition>
CountingBloomFilter::remove(std::string_view key)
{
  std::vector<Transition> out;
  auto bs = buckets(m_params, key);
  std::sort(bs.begin(), bs.end());
  bs.erase(std::unique(bs.begin(), bs.end()), bs.end());
  for (auto b : bs) {
    auto c = count(b);
    if (c == 0 || c == kMaxCount)
      continue;
    set(b, c - 1);
    if (c == 1)
      out.push_back({b, false});
  }
  return out;
}

bool
CountingBloomFilter::contains(std::string_view key) const
{
  for (auto b : buckets(m_params, key))
    if (count(b) == 0)
      return false;
  return true;
}

Bytes
encode(const UpdateMessage& m)
{
  BufferWriter w;
  w.u64(m.seq);
  w.u32(static_cast<std::uint32_t>(m.transitions.size()));
  for (const auto& t : m.transitions) {
    w.u32(t.bucket);
    w.u8(t.up ? 1 : 0);
  }
  return std::move(w).take();
}

UpdateMessage
decode_update(ByteSpan wire)
{
  BufferReader r(wire);
  UpdateMessage m;
  m.seq = r.u64();
  auto n = r.u32();
  if (n > wire.size() / 5)
    throw std::runtime_error("bloom update: bad count");
  m.transitions.resize(n);
  for (auto& t : m.transitions) {
    t.bucket = r.u32();
    t.up = r.u8() != 0;
  }
  r.expect_end();
  return m;
}

Bytes
encode_keys(const std::vector<std::string>& keys)
{
  if (keys.size() > kMaxBatch)
    throw std::invalid_argument("bloom: membership batch too large");
  BufferWriter w;
  w.u16(static_cast<std::uint16_t>(keys.size()));
  for (const auto& k : keys)
    w.str16(k);
  return std::move(w).take();
}

std::vector<std::string>
decode_keys(ByteSpan wire)
{
  BufferReader r(wire);
  auto n = r.u16();
  if (n > kMaxBatch)
    throw std::runtime_error("bloom: membership batch too large");
  std::vector<std::string> keys(n);
  for (auto& k : keys)
    k = r.str16();
  r.expect_end();
  return keys;
}

Bytes
encode_bits(const std::vector<bool>& bits)
{
  Bytes out((bits.size() + 7) / 8, 0);
  for (std::size_t i = 0; i < bits.size(); ++i)
    if (bits[i])
      out[i / 8] |= static_cast<std::uint8_t>(1u << (i % 8));
  return out;
}

std::vector<bool>
decode_bits(ByteSpan wire, std::size_t count)
{
  if (wire.size() != (count + 7) / 8)
    throw std::runtime_error("bloom: bitmask size mismatch");
  std::vector<bool> bits(count);
  for (std::size_t i = 0; i < count; ++i)
    bits[i] = (wire[i / 8] >> (i % 8)) & 1;
  return bits;
}

} // namespace ogb::bloom
