#pragma once

#include "ogb/common/bytes.hpp"
#include "ogb/geo/grid.hpp"

#include <string>
#include <vector>

namespace ogb::bloom {

struct BloomParams
{
  std::uint32_t m = 1 << 20;
  std::uint32_t h = 7;

  friend bool operator==(const BloomParams&, const BloomParams&) = default;
};

/// Sizes a filter for `expected` elements at the target false-positive rate.
BloomParams
params_for(std::size_t expected, double fp_rate = 0.01);

/// (1 - e^{-hn/m})^h
double
analytic_fp(const BloomParams& p, std::size_t n);

/// Filter key of a (tile, tenant, collection) triple.
std::string
bloom_key(const geo::TileId& tile, const std::string& tid, const std::string& cid);

/// The h bucket indices of a key (double hashing over SipHash-2-4).
std::vector<std::uint32_t>
buckets(const BloomParams& p, std::string_view key);

class BloomFilter
{
public:
  explicit BloomFilter(BloomParams p);

  void insert(std::string_view key);
  bool contains(std::string_view key) const;
  void set_bit(std::uint32_t bucket, bool value) { m_bits.at(bucket) = value; }
  bool bit(std::uint32_t bucket) const { return m_bits.at(bucket); }
  std::size_t popcount() const;
  const BloomParams& params() const { return m_params; }

private:
  BloomParams m_params;
  std::vector<bool> m_bits;
};

/// One bucket that crossed zero in a counting filter.
struct Transition
{
  std::uint32_t bucket = 0;
  bool up = true; // 0 -> 1 when true, 1 -> 0 otherwise

  friend bool operator==(const Transition&, const Transition&) = default;
};

/// 4-bit saturating counters; a saturated counter never decrements, so a
/// counter never drops below the number of live insertions.
class CountingBloomFilter
{
public:
  static constexpr std::uint8_t kMaxCount = 15;

  explicit CountingBloomFilter(BloomParams p);

  /// Returns buckets that went 0 -> 1.
  std::vector<Transition>
  insert(std::string_view key);

  /// Returns buckets that went 1 -> 0.
  std::vector<Transition>
  remove(std::string_view key);

  bool contains(std::string_view key) const;
  std::uint8_t count(std::uint32_t bucket) const;
  const BloomParams& params() const { return m_params; }

private:
  void set(std::uint32_t bucket, std::uint8_t v);

  BloomParams m_params;
  std::vector<std::uint8_t> m_nibbles;
};

/// BF update message: [engine-seq u64][count u32] then (bucket u32, up u8).
struct UpdateMessage
{
  std::uint64_t seq = 0;
  std::vector<Transition> transitions;
};

Bytes
encode(const UpdateMessage& m);

UpdateMessage
decode_update(ByteSpan wire);

/// Membership request: [count u16] then str16 keys; at most kMaxBatch keys.
inline constexpr std::size_t kMaxBatch = 1024;

Bytes
encode_keys(const std::vector<std::string>& keys);

std::vector<std::string>
decode_keys(ByteSpan wire);

/// Membership reply: one bit per key, LSB first.
Bytes
encode_bits(const std::vector<bool>& bits);

std::vector<bool>
decode_bits(ByteSpan wire, std::size_t count);

} // namespace ogb::bloom
