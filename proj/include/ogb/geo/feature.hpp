#pragma once

#include "ogb/geo/grid.hpp"

#include <optional>
#include <string>

namespace ogb::geo {

/// Closed validity interval in epoch seconds.
struct TimeInterval
{
  std::int64_t start = 0;
  std::int64_t end = 0;

  friend bool operator==(const TimeInterval&, const TimeInterval&) = default;
};

/// Closed object interval against a half-open query interval.
inline bool
overlaps(const TimeInterval& object, const TimeInterval& query)
{
  return object.start < query.end && object.end >= query.start;
}

/// A GeoJSON Feature with the mandatory oid/tid/uid/cid properties.
struct Feature
{
  std::string oid;
  std::string tid;
  std::string uid;
  std::string cid;
  Geometry geometry;
  std::optional<TimeInterval> valid_time;
  /// Original document, re-serialized compactly.
  std::string json;
};

/// Parses a Feature document; throws GeoError on missing or malformed
/// mandatory members. Numeric identifiers are kept in their JSON rendering.
Feature
parse_feature(std::string_view text);

/// Builds a Feature document from parts, used by generators and tests.
std::string
make_feature_json(const std::string& oid, const std::string& tid, const std::string& uid,
                  const std::string& cid, const Geometry& g,
                  const std::optional<TimeInterval>& valid_time = std::nullopt,
                  const std::string& extra_properties_json = "");

} // namespace ogb::geo
