#include "ogb/common/bytes.hpp"

namespace ogb {

std::string
to_hex(ByteSpan b)
{
  static constexpr char digits[] = "0123456789abcdef";
  std::string out;
  out.reserve(b.size() * 2);
  for (auto v : b) {
    out.push_back(digits[v >> 4]);
    out.push_back(digits[v & 0x0f]);
  }
  return out;
}

static int
hex_value(char c)
{
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

Bytes
from_hex(std::string_view hex)
{
  if (hex.size() % 2 != 0)
    throw DecodeError("odd-length hex string");
  Bytes out(hex.size() / 2);
  for (std::size_t i = 0; i < out.size(); ++i) {
    int hi = hex_value(hex[2 * i]);
    int lo = hex_value(hex[2 * i + 1]);
    if (hi < 0 || lo < 0)
      throw DecodeError("invalid hex digit");
    out[i] = static_cast<std::uint8_t>(hi << 4 | lo);
  }
  return out;
}

void
BufferWriter::u16(std::uint16_t v)
{
  m_buf.push_back(static_cast<std::uint8_t>(v >> 8));
  m_buf.push_back(static_cast<std::uint8_t>(v));
}

void
BufferWriter::u32(std::uint32_t v)
{
  for (int shift = 24; shift >= 0; shift -= 8)
    m_buf.push_back(static_cast<std::uint8_t>(v >> shift));
}

void
BufferWriter::u64(std::uint64_t v)
{
  for (int shift = 56; shift >= 0; shift -= 8)
    m_buf.push_back(static_cast<std::uint8_t>(v >> shift));
}

void
BufferWriter::blob16(ByteSpan b)
{
  if (b.size() > 0xffff)
    throw std::length_error("blob exceeds u16 length prefix");
  u16(static_cast<std::uint16_t>(b.size()));
  raw(b);
}

void
BufferWriter::blob32(ByteSpan b)
{
  if (b.size() > 0xffffffffULL)
    throw std::length_error("blob exceeds u32 length prefix");
  u32(static_cast<std::uint32_t>(b.size()));
  raw(b);
}

void
BufferWriter::str16(std::string_view s)
{
  blob16(ByteSpan(reinterpret_cast<const std::uint8_t*>(s.data()), s.size()));
}

void
BufferReader::need(std::size_t n) const
{
  if (remaining() < n)
    throw DecodeError("truncated buffer");
}

std::uint8_t
BufferReader::u8()
{
  need(1);
  return m_data[m_pos++];
}

std::uint16_t
BufferReader::u16()
{
  need(2);
  std::uint16_t v = static_cast<std::uint16_t>(m_data[m_pos] << 8 | m_data[m_pos + 1]);
  m_pos += 2;
  return v;
}

std::uint32_t
BufferReader::u32()
{
  need(4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i)
    v = v << 8 | m_data[m_pos + i];
  m_pos += 4;
  return v;
}

std::uint64_t
BufferReader::u64()
{
  need(8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i)
    v = v << 8 | m_data[m_pos + i];
  m_pos += 8;
  return v;
}

ByteSpan
BufferReader::raw(std::size_t n)
{
  need(n);
  auto out = m_data.subspan(m_pos, n);
  m_pos += n;
  return out;
}

std::string
BufferReader::str16()
{
  auto b = blob16();
  return std::string(b.begin(), b.end());
}

void
BufferReader::expect_end() const
{
  if (!empty())
    throw DecodeError("trailing bytes after packet");
}

} // namespace ogb
