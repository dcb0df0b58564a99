#pragma once

#include <compare>
#include <cstddef>
#include <functional>
#include <initializer_list>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace ogb::icn {

/// Hierarchical ICN name: an ordered list of opaque components, rendered
/// as "ndn:/a/b/c". Prefix tests and ordering are component-wise.
class Name
{
public:
  class Error : public std::invalid_argument
  {
  public:
    using std::invalid_argument::invalid_argument;
  };

  Name() = default;
  explicit Name(std::vector<std::string> components);
  Name(std::initializer_list<std::string> components);

  /// Accepts "ndn:/a/b", "/a/b" and percent-escaped components.
  static Name
  parse(std::string_view uri);

  Name&
  append(std::string component);

  Name
  appended(std::string component) const&;

  Name
  appended(const Name& suffix) const&;

  Name
  prefix(std::size_t n) const;

  Name
  sub(std::size_t pos, std::size_t n = std::string::npos) const;

  bool
  is_prefix_of(const Name& other) const;

  std::size_t size() const { return m_components.size(); }
  bool empty() const { return m_components.empty(); }
  const std::string& operator[](std::size_t i) const { return m_components[i]; }
  const std::string& at(std::size_t i) const { return m_components.at(i); }
  const std::string& back() const { return m_components.back(); }

  auto begin() const { return m_components.begin(); }
  auto end() const { return m_components.end(); }

  std::string
  to_uri() const;

  friend bool operator==(const Name&, const Name&) = default;
  friend std::strong_ordering operator<=>(const Name& a, const Name& b) = default;

private:
  std::vector<std::string> m_components;
};

std::ostream&
operator<<(std::ostream& os, const Name& name);

} // namespace ogb::icn

template<>
struct std::hash<ogb::icn::Name>
{
  std::size_t
  operator()(const ogb::icn::Name& n) const noexcept
  {
    std::size_t h = n.size();
    for (const auto& c : n)
      h ^= std::hash<std::string>{}(c) + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    return h;
  }
};
