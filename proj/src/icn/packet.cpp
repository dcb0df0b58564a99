#include "ogb/icn/packet.hpp"

#include <random>

namespace ogb::icn {

namespace {

constexpr std::uint8_t kHasSegment = 0x01;
constexpr std::uint8_t kHasFinal = 0x02;

std::size_t
name_size(const Name& n)
{
  std::size_t s = 2;
  for (const auto& c : n)
    s += 2 + c.size();
  return s;
}

void
encode_signature(BufferWriter& w, const SignatureInfo& sig)
{
  w.u8(static_cast<std::uint8_t>(sig.type));
  encode_name(w, sig.key_locator);
  w.blob16(sig.value);
}

SignatureInfo
decode_signature(BufferReader& r)
{
  SignatureInfo sig;
  auto type = r.u8();
  if (type > static_cast<std::uint8_t>(SignatureType::HmacSha256))
    throw DecodeError("unknown signature type");
  sig.type = static_cast<SignatureType>(type);
  sig.key_locator = decode_name(r);
  auto v = r.blob16();
  sig.value.assign(v.begin(), v.end());
  return sig;
}

void
encode_interest_body(BufferWriter& w, const Interest& i)
{
  w.u8(static_cast<std::uint8_t>(PacketType::Interest));
  encode_name(w, i.name);
  w.u32(i.nonce);
  w.u32(static_cast<std::uint32_t>(i.lifetime.count()));
  w.blob32(i.parameters);
  w.u8(i.signature ? 1 : 0);
  if (i.signature)
    encode_signature(w, *i.signature);
}

void
encode_data_body(BufferWriter& w, const Data& d)
{
  w.u8(static_cast<std::uint8_t>(PacketType::Data));
  encode_name(w, d.name);
  w.u32(static_cast<std::uint32_t>(d.freshness.count()));
  std::uint8_t flags = (d.segment ? kHasSegment : 0) | (d.final_segment ? kHasFinal : 0);
  w.u8(flags);
  if (d.segment)
    w.u32(*d.segment);
  if (d.final_segment)
    w.u32(*d.final_segment);
  w.blob32(d.payload);
  encode_signature(w, d.signature);
}

Interest
decode_interest_fields(BufferReader& r)
{
  Interest i;
  i.name = decode_name(r);
  i.nonce = r.u32();
  i.lifetime = Millis(r.u32());
  auto params = r.blob32();
  i.parameters.assign(params.begin(), params.end());
  auto has_sig = r.u8();
  if (has_sig > 1)
    throw DecodeError("bad signature flag");
  if (has_sig)
    i.signature = decode_signature(r);
  return i;
}

Data
decode_data_fields(BufferReader& r)
{
  Data d;
  d.name = decode_name(r);
  d.freshness = Millis(r.u32());
  auto flags = r.u8();
  if (flags & ~(kHasSegment | kHasFinal))
    throw DecodeError("bad segment flags");
  if (flags & kHasSegment)
    d.segment = r.u32();
  if (flags & kHasFinal)
    d.final_segment = r.u32();
  auto payload = r.blob32();
  d.payload.assign(payload.begin(), payload.end());
  d.signature = decode_signature(r);
  return d;
}

} // namespace

void
encode_name(BufferWriter& w, const Name& name)
{
  if (name.size() > 0xffff)
    throw std::length_error("too many name components");
  w.u16(static_cast<std::uint16_t>(name.size()));
  for (const auto& c : name)
    w.str16(c);
}

Name
decode_name(BufferReader& r)
{
  auto count = r.u16();
  std::vector<std::string> comps;
  comps.reserve(count);
  for (std::uint16_t i = 0; i < count; ++i)
    comps.push_back(r.str16());
  return Name(std::move(comps));
}

Bytes
Interest::signed_portion(const Name& key_locator) const
{
  BufferWriter w;
  encode_name(w, name);
  w.blob32(parameters);
  encode_name(w, key_locator);
  return std::move(w).take();
}

Bytes
Data::signed_portion(const Name& key_locator) const
{
  BufferWriter w;
  encode_name(w, name);
  w.blob32(payload);
  w.u32(static_cast<std::uint32_t>(freshness.count()));
  w.u8((segment ? kHasSegment : 0) | (final_segment ? kHasFinal : 0));
  w.u32(segment.value_or(0));
  w.u32(final_segment.value_or(0));
  encode_name(w, key_locator);
  return std::move(w).take();
}

Bytes
encode(const Interest& interest)
{
  BufferWriter w;
  encode_interest_body(w, interest);
  return std::move(w).take();
}

Bytes
encode(const Data& data)
{
  BufferWriter w;
  encode_data_body(w, data);
  return std::move(w).take();
}

Bytes
encode(const Packet& packet)
{
  return std::visit([](const auto& p) { return encode(p); }, packet);
}

Packet
decode(ByteSpan wire)
{
  BufferReader r(wire);
  auto type = r.u8();
  Packet out;
  if (type == static_cast<std::uint8_t>(PacketType::Interest))
    out = decode_interest_fields(r);
  else if (type == static_cast<std::uint8_t>(PacketType::Data))
    out = decode_data_fields(r);
  else
    throw DecodeError("unknown packet type");
  r.expect_end();
  return out;
}

Data
decode_data(ByteSpan wire)
{
  auto p = decode(wire);
  if (auto* d = std::get_if<Data>(&p))
    return std::move(*d);
  throw DecodeError("expected a Data packet");
}

Interest
decode_interest(ByteSpan wire)
{
  auto p = decode(wire);
  if (auto* i = std::get_if<Interest>(&p))
    return std::move(*i);
  throw DecodeError("expected an Interest packet");
}

std::size_t
wire_size(const Data& d)
{
  return 1 + name_size(d.name) + 4 + 1 + (d.segment ? 4 : 0) + (d.final_segment ? 4 : 0) + 4 +
         d.payload.size() + 1 + name_size(d.signature.key_locator) + 2 + d.signature.value.size();
}

std::size_t
wire_size(const Interest& i)
{
  std::size_t s = 1 + name_size(i.name) + 4 + 4 + 4 + i.parameters.size() + 1;
  if (i.signature)
    s += 1 + name_size(i.signature->key_locator) + 2 + i.signature->value.size();
  return s;
}

std::uint32_t
random_nonce()
{
  thread_local std::mt19937 rng{std::random_device{}()};
  return rng();
}

} // namespace ogb::icn
