#include "ogb/tess/geo_tess.hpp"

namespace ogb::tess {

namespace {

const GridSpec kGeo = GridSpec::geo();
const GridSpec kTime = GridSpec::temporal();

std::string
tile_name(const Cell& c)
{
  return geo::tile_prefix(to_tile(c)).to_uri();
}

} // namespace

BoxRegion
geo_region(const geo::BBox& box)
{
  geo::validate(box);
  auto s = static_cast<double>(geo::scale(kGeo.levels - 1));
  return BoxRegion(box.min.lng * s, box.min.lat * s, box.max.lng * s, box.max.lat * s);
}

Cell
to_cell(const geo::TileId& t)
{
  return {t.level, t.ix, t.iy};
}

geo::TileId
to_tile(const Cell& c)
{
  return {c.level, c.ix, c.iy};
}

GeoTessellation
to_geo(const Tessellation& t)
{
  GeoTessellation g;
  g.tiles.reserve(t.tiles.size());
  for (const auto& c : t.tiles)
    g.tiles.push_back(to_tile(c));
  g.stretch = t.stretch;
  g.constraint_respected = t.constraint_respected;
  return g;
}

GeoTessellation
tessellate_box(const geo::BBox& box, std::size_t k)
{
  ConstrainedOptions options;
  options.name = tile_name;
  return to_geo(constrained(kGeo, geo_region(box), k, options));
}

GeoTessellation
min_stretch_box(const geo::BBox& box)
{
  return to_geo(min_stretch(kGeo, geo_region(box)));
}

GeoTessellation
mst_box(const geo::BBox& box)
{
  return to_geo(min_stretch_and_tiles(kGeo, geo_region(box)));
}

PeriodSet
temporal_decompose(const geo::TimeInterval& interval, std::size_t max_periods)
{
  if (interval.start >= interval.end)
    throw std::invalid_argument("empty time interval");
  BoxRegion region(static_cast<double>(interval.start) / 60.0, 0, static_cast<double>(interval.end) / 60.0, 1);
  auto t = constrained(kTime, region, max_periods);
  PeriodSet out;
  out.query = interval;
  out.constraint_respected = t.constraint_respected;
  for (const auto& c : t.tiles)
    out.periods.push_back({kPeriodMinutes[static_cast<std::size_t>(c.level)], c.ix * kTime.unit_x(c.level)});
  std::sort(out.periods.begin(), out.periods.end(),
            [](const Period& a, const Period& b) { return a.start_minute < b.start_minute; });
  return out;
}

} // namespace ogb::tess
