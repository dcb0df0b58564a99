#pragma once

#include "ogb/common/bytes.hpp"
#include "ogb/common/clock.hpp"
#include "ogb/icn/name.hpp"

#include <cstdint>
#include <optional>
#include <variant>

namespace ogb::icn {

enum class SignatureType : std::uint8_t {
  None = 0,
  Ed25519 = 1,
  HmacSha256 = 2,
};

struct SignatureInfo
{
  SignatureType type = SignatureType::None;
  Name key_locator;
  Bytes value;

  friend bool operator==(const SignatureInfo&, const SignatureInfo&) = default;
};

struct Interest
{
  Name name;
  std::uint32_t nonce = 0;
  Millis lifetime{4000};
  Bytes parameters;
  std::optional<SignatureInfo> signature;

  /// Bytes covered by the signature: name, parameters and key-locator.
  Bytes
  signed_portion(const Name& key_locator) const;

  friend bool operator==(const Interest&, const Interest&) = default;
};

struct Data
{
  Name name;
  Bytes payload;
  Millis freshness{0};
  std::optional<std::uint32_t> segment;
  std::optional<std::uint32_t> final_segment;
  SignatureInfo signature;

  /// Bytes covered by the signature: name, payload, freshness, segment
  /// markers and key-locator.
  Bytes
  signed_portion(const Name& key_locator) const;

  friend bool operator==(const Data&, const Data&) = default;
};

using Packet = std::variant<Interest, Data>;

enum class PacketType : std::uint8_t {
  Interest = 0x01,
  Data = 0x02,
};

/// Wire format: [type:u8][name-count:u16][components...][fields per type],
/// all integers big-endian, components as u16 length + bytes.
Bytes
encode(const Interest& interest);

Bytes
encode(const Data& data);

Bytes
encode(const Packet& packet);

Packet
decode(ByteSpan wire);

Data
decode_data(ByteSpan wire);

Interest
decode_interest(ByteSpan wire);

/// Encoded size without materializing the buffer.
std::size_t
wire_size(const Data& data);

std::size_t
wire_size(const Interest& interest);

void
encode_name(BufferWriter& w, const Name& name);

Name
decode_name(BufferReader& r);

std::uint32_t
random_nonce();

} // namespace ogb::icn
