#pragma once

#include "ogb/icn/name.hpp"

#include <array>
#include <compare>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace ogb::geo {

class GeoError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr int kLevels = 3;
inline constexpr double kKmPerDegree = 100.0;

struct GeoCoord
{
  double lng = 0;
  double lat = 0;

  friend bool operator==(const GeoCoord&, const GeoCoord&) = default;
};

/// Axis-aligned box in degrees. Range queries treat it as half-open
/// [min, max); object envelopes are treated as closed.
struct BBox
{
  GeoCoord min;
  GeoCoord max;

  double width() const { return max.lng - min.lng; }
  double height() const { return max.lat - min.lat; }
  double area_deg2() const { return width() * height(); }
  double area_km2() const { return area_deg2() * kKmPerDegree * kKmPerDegree; }

  friend bool operator==(const BBox&, const BBox&) = default;
};

/// Throws GeoError unless min < max on both axes and the box stays inside
/// [-180,180] x [-90,90].
void
validate(const BBox& box);

/// Tile of a level, stored as integer grid indices: sw = (ix, iy) / 10^level.
struct TileId
{
  int level = 0;
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  GeoCoord sw() const;
  double side() const;

  friend bool operator==(const TileId&, const TileId&) = default;
  friend auto operator<=>(const TileId&, const TileId&) = default;
};

std::int64_t
scale(int level);

/// Grid index of v at the level; values within 1e-7 grid units of a line snap to it
/// so decimal literals such as 12.51 land on their own tile.
std::int64_t
grid_index(double v, int level);

void
validate(const GeoCoord& c);

TileId
tile_of(const GeoCoord& c, int level);

/// Tile with the given south-west corner; throws if not grid aligned.
TileId
tile_at(const GeoCoord& sw, int level);

BBox
tile_bbox(const TileId& t);

std::vector<TileId>
children(const TileId& t);

TileId
parent(const TileId& t);

/// ndn:/OGB/lng0/lat0/<lng-digit lat-digit>.../GPS-ID
icn::Name
tile_prefix(const TileId& t);

/// tile_prefix without the trailing GPS-ID marker; this is the prefix an
/// engine announces and it is a name-prefix of every descendant tile name.
icn::Name
routing_prefix(const TileId& t);

/// Inverse of tile_prefix. Extra components after GPS-ID are ignored when
/// allow_suffix is set.
TileId
parse_tile_prefix(const icn::Name& n, bool allow_suffix = false);

/// Number of components of tile_prefix(t) for a level.
inline std::size_t
tile_prefix_size(int level)
{
  return 4 + static_cast<std::size_t>(level);
}

/// Level-`level` tiles overlapping the half-open box.
std::vector<TileId>
tiles_in_box(const BBox& box, int level);

enum class GeometryKind { Point, MultiPoint, Other };

struct Geometry
{
  GeometryKind kind = GeometryKind::Point;
  std::vector<GeoCoord> points;
  BBox bbox;

  static Geometry
  point(GeoCoord c);

  static Geometry
  multipoint(std::vector<GeoCoord> pts);

  static Geometry
  other(BBox envelope);
};

/// Point/MultiPoint: tiles containing at least one point. Other: tiles whose
/// box meets the closed envelope.
std::vector<TileId>
intersecting_tiles(const Geometry& g, int level);

bool
contains(const BBox& half_open, const GeoCoord& c);

/// Intersect-mode predicate against a half-open query box.
bool
intersects(const Geometry& g, const BBox& query);

/// Include-mode predicate: the whole geometry lies in the half-open box.
bool
within(const Geometry& g, const BBox& query);

} // namespace ogb::geo
