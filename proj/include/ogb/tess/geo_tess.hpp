#pragma once

#include "ogb/geo/feature.hpp"
#include "ogb/tess/tessellate.hpp"

namespace ogb::tess {

/// Query box expressed in level-2 tile units.
BoxRegion
geo_region(const geo::BBox& box);

Cell
to_cell(const geo::TileId& t);

geo::TileId
to_tile(const Cell& c);

struct GeoTessellation
{
  std::vector<geo::TileId> tiles;
  double stretch = 1;
  bool constraint_respected = true;
};

GeoTessellation
to_geo(const Tessellation& t);

/// Constrained tessellation of a query box; exact stretch ties are broken
/// by the smallest tile-prefix.
GeoTessellation
tessellate_box(const geo::BBox& box, std::size_t k);

GeoTessellation
min_stretch_box(const geo::BBox& box);

GeoTessellation
mst_box(const geo::BBox& box);

inline constexpr std::array<std::int64_t, 5> kPeriodMinutes{10000, 1000, 100, 10, 1};
inline constexpr std::size_t kDefaultMaxPeriods = 5;

/// Aligned time slot: [start_minute, start_minute + size_minutes).
struct Period
{
  std::int64_t size_minutes = 1;
  std::int64_t start_minute = 0;

  std::int64_t start_seconds() const { return start_minute * 60; }
  std::int64_t end_seconds() const { return (start_minute + size_minutes) * 60; }

  friend bool operator==(const Period&, const Period&) = default;
  friend auto operator<=>(const Period&, const Period&) = default;
};

struct PeriodSet
{
  std::vector<Period> periods;
  geo::TimeInterval query;
  bool constraint_respected = true;
};

/// Covers the half-open interval [start, end) epoch seconds with at most
/// max_periods aligned periods, falling back to the 10000-minute cover.
PeriodSet
temporal_decompose(const geo::TimeInterval& interval, std::size_t max_periods = kDefaultMaxPeriods);

} // namespace ogb::tess
