#pragma once

#include "ogb/icn/name.hpp"

#include <optional>
#include <string>

namespace ogb::trust {

enum class Operation { Insert, Query, Delete };

std::string
to_string(Operation op);

struct AccessDecision
{
  Operation operation = Operation::Query;
  bool allow = false;
  std::string reason;

  explicit operator bool() const { return allow; }
};

/// Identifiers carried by an oName/qName/dName.
struct TargetIds
{
  std::string did;
  std::optional<std::string> uid; // absent for qNames
};

/// Identifiers carried by a klName.
struct KeyLocatorInfo
{
  std::string did;
  std::string uid;
  bool write = false;
};

/// CERT/{did}/{uid}/{r|rw}; throws TrustError otherwise.
KeyLocatorInfo
parse_key_locator(const icn::Name& kl_name);

/// OGB names (tile-prefix/DATA/tid/cid/uid/oid[/DELETE], tile-prefix/TILE/tid/cid[/...])
/// map to did = tid:cid. Any other name is read as {sid}/{did}/{uid}/... for
/// Insert and Delete and {sid}/{did}/... for Query. Throws TrustError when
/// the name does not fit the scheme of the operation.
TargetIds
parse_target(Operation op, const icn::Name& target_name);

AccessDecision
check_access(Operation op, const TargetIds& target, const KeyLocatorInfo& key);

/// Never throws; unparseable names are denied.
AccessDecision
check_access(Operation op, const icn::Name& target_name, const icn::Name& kl_name);

} // namespace ogb::trust
