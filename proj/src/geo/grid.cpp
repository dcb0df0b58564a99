#include "ogb/geo/grid.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace ogb::geo {

namespace {

std::int64_t
floor_div(std::int64_t a, std::int64_t b)
{
  auto q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0)))
    --q;
  return q;
}

std::int64_t
parse_int(const std::string& s)
{
  std::size_t pos = 0;
  std::int64_t v = 0;
  try {
    v = std::stoll(s, &pos);
  }
  catch (const std::exception&) {
    throw GeoError("bad integer component '" + s + "'");
  }
  if (pos != s.size())
    throw GeoError("bad integer component '" + s + "'");
  return v;
}

} // namespace

void
validate(const GeoCoord& c)
{
  if (!std::isfinite(c.lng) || !std::isfinite(c.lat) || c.lng < -180 || c.lng >= 180 || c.lat < -90 ||
      c.lat >= 90)
    throw GeoError("coordinate out of range: (" + std::to_string(c.lng) + ", " + std::to_string(c.lat) + ")");
}

void
validate(const BBox& box)
{
  if (!(box.min.lng < box.max.lng) || !(box.min.lat < box.max.lat))
    throw GeoError("degenerate bounding box");
  if (box.min.lng < -180 || box.max.lng > 180 || box.min.lat < -90 || box.max.lat > 90)
    throw GeoError("bounding box outside the world");
}

std::int64_t
scale(int level)
{
  static constexpr std::array<std::int64_t, 8> table{1, 10, 100, 1000, 10000, 100000, 1000000, 10000000};
  if (level < 0 || level >= static_cast<int>(table.size()))
    throw GeoError("bad level " + std::to_string(level));
  return table[static_cast<std::size_t>(level)];
}

std::int64_t
grid_index(double v, int level)
{
  double x = v * static_cast<double>(scale(level));
  double r = std::round(x);
  if (std::abs(x - r) < 1e-7)
    return static_cast<std::int64_t>(r);
  return static_cast<std::int64_t>(std::floor(x));
}

GeoCoord
TileId::sw() const
{
  auto s = static_cast<double>(scale(level));
  return {static_cast<double>(ix) / s, static_cast<double>(iy) / s};
}

double
TileId::side() const
{
  return 1.0 / static_cast<double>(scale(level));
}

TileId
tile_of(const GeoCoord& c, int level)
{
  validate(c);
  if (level < 0 || level >= kLevels)
    throw GeoError("bad level " + std::to_string(level));
  return {level, grid_index(c.lng, level), grid_index(c.lat, level)};
}

TileId
tile_at(const GeoCoord& sw, int level)
{
  auto t = tile_of(sw, level);
  auto s = static_cast<double>(scale(level));
  if (std::abs(sw.lng * s - static_cast<double>(t.ix)) > 1e-6 ||
      std::abs(sw.lat * s - static_cast<double>(t.iy)) > 1e-6)
    throw GeoError("corner not aligned to the level grid");
  return t;
}

BBox
tile_bbox(const TileId& t)
{
  auto s = static_cast<double>(scale(t.level));
  return {{static_cast<double>(t.ix) / s, static_cast<double>(t.iy) / s},
          {static_cast<double>(t.ix + 1) / s, static_cast<double>(t.iy + 1) / s}};
}

std::vector<TileId>
children(const TileId& t)
{
  if (t.level + 1 >= kLevels)
    throw GeoError("finest-level tile has no children");
  std::vector<TileId> out;
  out.reserve(100);
  for (std::int64_t dx = 0; dx < 10; ++dx)
    for (std::int64_t dy = 0; dy < 10; ++dy)
      out.push_back({t.level + 1, t.ix * 10 + dx, t.iy * 10 + dy});
  return out;
}

TileId
parent(const TileId& t)
{
  if (t.level <= 0)
    throw GeoError("level-0 tile has no parent");
  return {t.level - 1, floor_div(t.ix, 10), floor_div(t.iy, 10)};
}

icn::Name
routing_prefix(const TileId& t)
{
  auto s = scale(t.level);
  auto x0 = floor_div(t.ix, s);
  auto y0 = floor_div(t.iy, s);
  auto ox = t.ix - x0 * s;
  auto oy = t.iy - y0 * s;
  icn::Name n;
  n.append("OGB");
  n.append(std::to_string(x0));
  n.append(std::to_string(y0));
  for (int k = 1; k <= t.level; ++k) {
    auto d = scale(t.level - k);
    std::string c;
    c += static_cast<char>('0' + (ox / d) % 10);
    c += static_cast<char>('0' + (oy / d) % 10);
    n.append(std::move(c));
  }
  return n;
}

icn::Name
tile_prefix(const TileId& t)
{
  auto n = routing_prefix(t);
  n.append("GPS-ID");
  return n;
}

TileId
parse_tile_prefix(const icn::Name& n, bool allow_suffix)
{
  if (n.size() < 4 || n[0] != "OGB")
    throw GeoError("not a tile prefix: " + n.to_uri());
  std::size_t gps = 3;
  while (gps < n.size() && n[gps] != "GPS-ID")
    ++gps;
  if (gps == n.size())
    throw GeoError("missing GPS-ID: " + n.to_uri());
  if (!allow_suffix && gps + 1 != n.size())
    throw GeoError("trailing components after GPS-ID: " + n.to_uri());
  int level = static_cast<int>(gps - 3);
  if (level >= kLevels)
    throw GeoError("too many decimal components: " + n.to_uri());

  auto x0 = parse_int(n[1]);
  auto y0 = parse_int(n[2]);
  if (x0 < -180 || x0 >= 180 || y0 < -90 || y0 >= 90)
    throw GeoError("level-0 corner out of range: " + n.to_uri());
  std::int64_t ox = 0, oy = 0;
  for (int k = 1; k <= level; ++k) {
    const auto& c = n[static_cast<std::size_t>(2 + k)];
    if (c.size() != 2 || !std::isdigit(static_cast<unsigned char>(c[0])) ||
        !std::isdigit(static_cast<unsigned char>(c[1])))
      throw GeoError("decimal component must have two digits: " + c);
    ox = ox * 10 + (c[0] - '0');
    oy = oy * 10 + (c[1] - '0');
  }
  auto s = scale(level);
  return {level, x0 * s + ox, y0 * s + oy};
}

std::vector<TileId>
tiles_in_box(const BBox& box, int level)
{
  validate(box);
  auto s = static_cast<double>(scale(level));
  auto x0 = grid_index(box.min.lng, level);
  auto y0 = grid_index(box.min.lat, level);
  auto x1 = grid_index(box.max.lng, level);
  auto y1 = grid_index(box.max.lat, level);
  // half-open upper bound: a max on a grid line excludes that tile
  if (static_cast<double>(x1) >= box.max.lng * s - 1e-7)
    --x1;
  if (static_cast<double>(y1) >= box.max.lat * s - 1e-7)
    --y1;
  std::vector<TileId> out;
  out.reserve(static_cast<std::size_t>((x1 - x0 + 1) * (y1 - y0 + 1)));
  for (auto x = x0; x <= x1; ++x)
    for (auto y = y0; y <= y1; ++y)
      out.push_back({level, x, y});
  return out;
}

Geometry
Geometry::point(GeoCoord c)
{
  validate(c);
  return {GeometryKind::Point, {c}, {c, c}};
}

Geometry
Geometry::multipoint(std::vector<GeoCoord> pts)
{
  if (pts.empty())
    throw GeoError("MultiPoint needs at least one coordinate");
  BBox env{pts[0], pts[0]};
  for (const auto& p : pts) {
    validate(p);
    env.min.lng = std::min(env.min.lng, p.lng);
    env.min.lat = std::min(env.min.lat, p.lat);
    env.max.lng = std::max(env.max.lng, p.lng);
    env.max.lat = std::max(env.max.lat, p.lat);
  }
  return {GeometryKind::MultiPoint, std::move(pts), env};
}

Geometry
Geometry::other(BBox envelope)
{
  validate(envelope.min);
  validate(envelope.max);
  if (envelope.min.lng > envelope.max.lng || envelope.min.lat > envelope.max.lat)
    throw GeoError("inverted envelope");
  return {GeometryKind::Other, {}, envelope};
}

std::vector<TileId>
intersecting_tiles(const Geometry& g, int level)
{
  std::set<TileId> tiles;
  if (g.kind == GeometryKind::Other) {
    auto lo = tile_of(g.bbox.min, level);
    auto hi = tile_of(g.bbox.max, level);
    for (auto x = lo.ix; x <= hi.ix; ++x)
      for (auto y = lo.iy; y <= hi.iy; ++y)
        tiles.insert({level, x, y});
  }
  else {
    for (const auto& p : g.points)
      tiles.insert(tile_of(p, level));
  }
  return {tiles.begin(), tiles.end()};
}

bool
contains(const BBox& q, const GeoCoord& c)
{
  return q.min.lng <= c.lng && c.lng < q.max.lng && q.min.lat <= c.lat && c.lat < q.max.lat;
}

bool
intersects(const Geometry& g, const BBox& q)
{
  if (g.kind == GeometryKind::Other)
    return g.bbox.min.lng < q.max.lng && g.bbox.max.lng >= q.min.lng && g.bbox.min.lat < q.max.lat &&
           g.bbox.max.lat >= q.min.lat;
  return std::any_of(g.points.begin(), g.points.end(), [&](const GeoCoord& c) { return contains(q, c); });
}

bool
within(const Geometry& g, const BBox& q)
{
  if (g.kind == GeometryKind::Other)
    return contains(q, g.bbox.min) && contains(q, g.bbox.max);
  return std::all_of(g.points.begin(), g.points.end(), [&](const GeoCoord& c) { return contains(q, c); });
}

} // namespace ogb::geo
