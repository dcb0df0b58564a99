#include "ogb/trust/access.hpp"

#include "ogb/geo/grid.hpp"
#include "ogb/trust/keys.hpp"

namespace ogb::trust {

std::string
to_string(Operation op)
{
  switch (op) {
  case Operation::Insert: return "Insert";
  case Operation::Query: return "Query";
  case Operation::Delete: return "Delete";
  }
  return "?";
}

KeyLocatorInfo
parse_key_locator(const icn::Name& kl)
{
  if (kl.size() != 4 || kl[0] != "CERT")
    throw TrustError("malformed key-locator " + kl.to_uri());
  if (kl[3] != "r" && kl[3] != "rw")
    throw TrustError("bad permission in " + kl.to_uri());
  return {kl[1], kl[2], kl[3] == "rw"};
}

namespace {

std::optional<std::size_t>
gps_marker(const icn::Name& n)
{
  if (n.empty() || n[0] != "OGB")
    return std::nullopt;
  for (std::size_t i = 3; i < n.size(); ++i)
    if (n[i] == "GPS-ID")
      return i;
  return std::nullopt;
}

TargetIds
parse_ogb(Operation op, const icn::Name& n, std::size_t marker)
{
  geo::parse_tile_prefix(n.prefix(marker + 1));
  std::size_t rest = n.size() - marker - 1;
  if (rest == 0)
    throw TrustError("OGB name without DATA/TILE part: " + n.to_uri());
  const auto& kind = n[marker + 1];
  if (op == Operation::Query) {
    if (kind != "TILE" || rest < 3)
      throw TrustError("not a tile-query name: " + n.to_uri());
    return {n[marker + 2] + ":" + n[marker + 3], std::nullopt};
  }
  if (kind != "DATA")
    throw TrustError("not an OGB-Data name: " + n.to_uri());
  std::size_t expect = op == Operation::Delete ? 6 : 5;
  if (rest != expect || (op == Operation::Delete && n[n.size() - 1] != "DELETE"))
    throw TrustError("malformed OGB-Data name: " + n.to_uri());
  return {n[marker + 2] + ":" + n[marker + 3], n[marker + 4]};
}

} // namespace

TargetIds
parse_target(Operation op, const icn::Name& n)
{
  if (auto marker = gps_marker(n)) {
    try {
      return parse_ogb(op, n, *marker);
    }
    catch (const geo::GeoError& e) {
      throw TrustError(std::string("bad tile prefix: ") + e.what());
    }
  }
  if (op == Operation::Query) {
    if (n.size() < 2)
      throw TrustError("qName needs sid and did: " + n.to_uri());
    return {n[1], std::nullopt};
  }
  if (n.size() < 3)
    throw TrustError("name needs sid, did and uid: " + n.to_uri());
  return {n[1], n[2]};
}

AccessDecision
check_access(Operation op, const TargetIds& target, const KeyLocatorInfo& key)
{
  AccessDecision d{op, false, {}};
  if (target.did != key.did) {
    d.reason = "did mismatch";
    return d;
  }
  if (op == Operation::Query) {
    d.allow = true;
    d.reason = "ok";
    return d;
  }
  if (!target.uid || *target.uid != key.uid) {
    d.reason = "uid mismatch";
    return d;
  }
  if (!key.write) {
    d.reason = "write permission required";
    return d;
  }
  d.allow = true;
  d.reason = "ok";
  return d;
}

AccessDecision
check_access(Operation op, const icn::Name& target_name, const icn::Name& kl_name)
{
  try {
    return check_access(op, parse_target(op, target_name), parse_key_locator(kl_name));
  }
  catch (const TrustError& e) {
    return {op, false, e.what()};
  }
}

} // namespace ogb::trust
