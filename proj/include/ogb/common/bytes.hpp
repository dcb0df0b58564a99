#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ogb {

using Bytes = std::vector<std::uint8_t>;
using ByteSpan = std::span<const std::uint8_t>;

class DecodeError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline Bytes
to_bytes(std::string_view s)
{
  return Bytes(s.begin(), s.end());
}

inline std::string
to_string(ByteSpan b)
{
  return std::string(b.begin(), b.end());
}

std::string
to_hex(ByteSpan b);

Bytes
from_hex(std::string_view hex);

/// Appends big-endian integers and length-prefixed blobs to a byte buffer.
class BufferWriter
{
public:
  void u8(std::uint8_t v) { m_buf.push_back(v); }
  void u16(std::uint16_t v);
  void u32(std::uint32_t v);
  void u64(std::uint64_t v);
  void i64(std::int64_t v) { u64(static_cast<std::uint64_t>(v)); }
  void raw(ByteSpan b) { m_buf.insert(m_buf.end(), b.begin(), b.end()); }

  // u16 / u32 length prefix followed by the bytes
  void blob16(ByteSpan b);
  void blob32(ByteSpan b);
  void str16(std::string_view s);

  const Bytes& bytes() const& { return m_buf; }
  Bytes&& take() && { return std::move(m_buf); }
  std::size_t size() const { return m_buf.size(); }

private:
  Bytes m_buf;
};

/// Bounds-checked reader; throws DecodeError on truncation.
class BufferReader
{
public:
  explicit BufferReader(ByteSpan b) : m_data(b) {}

  std::uint8_t u8();
  std::uint16_t u16();
  std::uint32_t u32();
  std::uint64_t u64();
  std::int64_t i64() { return static_cast<std::int64_t>(u64()); }
  ByteSpan raw(std::size_t n);
  ByteSpan blob16() { return raw(u16()); }
  ByteSpan blob32() { return raw(u32()); }
  std::string str16();

  bool empty() const { return m_pos == m_data.size(); }
  std::size_t remaining() const { return m_data.size() - m_pos; }
  void expect_end() const;

private:
  void need(std::size_t n) const;

  ByteSpan m_data;
  std::size_t m_pos = 0;
};

} // namespace ogb
