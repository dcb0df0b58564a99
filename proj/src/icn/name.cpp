#include "ogb/icn/name.hpp"

#include <algorithm>

namespace ogb::icn {

Name::Name(std::vector<std::string> components)
  : m_components(std::move(components))
{
}

Name::Name(std::initializer_list<std::string> components)
  : m_components(components)
{
}

static bool
is_unreserved(unsigned char c)
{
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
         c == '-' || c == '.' || c == '_' || c == '~' || c == '=' || c == ':' || c == '+' ||
         c == ',' || c == '@';
}

static int
hex_digit(char c)
{
  if (c >= '0' && c <= '9')
    return c - '0';
  if (c >= 'a' && c <= 'f')
    return c - 'a' + 10;
  if (c >= 'A' && c <= 'F')
    return c - 'A' + 10;
  return -1;
}

static std::string
unescape(std::string_view s)
{
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] != '%') {
      out.push_back(s[i]);
      continue;
    }
    if (i + 2 >= s.size())
      throw Name::Error("truncated percent escape in name");
    int hi = hex_digit(s[i + 1]);
    int lo = hex_digit(s[i + 2]);
    if (hi < 0 || lo < 0)
      throw Name::Error("invalid percent escape in name");
    out.push_back(static_cast<char>(hi << 4 | lo));
    i += 2;
  }
  return out;
}

Name
Name::parse(std::string_view uri)
{
  if (uri.starts_with("ndn:"))
    uri.remove_prefix(4);
  if (uri.empty() || uri.front() != '/')
    throw Error("name must start with '/': " + std::string(uri));
  uri.remove_prefix(1);

  std::vector<std::string> comps;
  while (!uri.empty()) {
    auto slash = uri.find('/');
    auto piece = uri.substr(0, slash);
    if (piece.empty())
      throw Error("empty name component");
    comps.push_back(unescape(piece));
    if (slash == std::string_view::npos)
      break;
    uri.remove_prefix(slash + 1);
    if (uri.empty())
      break; // tolerate a trailing slash
  }
  return Name(std::move(comps));
}

Name&
Name::append(std::string component)
{
  m_components.push_back(std::move(component));
  return *this;
}

Name
Name::appended(std::string component) const&
{
  Name n(*this);
  n.append(std::move(component));
  return n;
}

Name
Name::appended(const Name& suffix) const&
{
  Name n(*this);
  n.m_components.insert(n.m_components.end(), suffix.begin(), suffix.end());
  return n;
}

Name
Name::prefix(std::size_t n) const
{
  n = std::min(n, size());
  return Name(std::vector<std::string>(m_components.begin(), m_components.begin() + n));
}

Name
Name::sub(std::size_t pos, std::size_t n) const
{
  pos = std::min(pos, size());
  n = std::min(n, size() - pos);
  return Name(std::vector<std::string>(m_components.begin() + pos, m_components.begin() + pos + n));
}

bool
Name::is_prefix_of(const Name& other) const
{
  if (size() > other.size())
    return false;
  return std::equal(begin(), end(), other.begin());
}

std::string
Name::to_uri() const
{
  static constexpr char digits[] = "0123456789ABCDEF";
  std::string out = "ndn:";
  if (m_components.empty())
    return out + "/";
  for (const auto& c : m_components) {
    out.push_back('/');
    for (unsigned char ch : c) {
      if (is_unreserved(ch)) {
        out.push_back(static_cast<char>(ch));
      }
      else {
        out.push_back('%');
        out.push_back(digits[ch >> 4]);
        out.push_back(digits[ch & 0x0f]);
      }
    }
  }
  return out;
}

std::ostream&
operator<<(std::ostream& os, const Name& name)
{
  return os << name.to_uri();
}

} // namespace ogb::icn
