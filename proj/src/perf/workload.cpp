#include "ogb/perf/workload.hpp"

#include <algorithm>
#include <set>

namespace ogb::perf {

std::vector<geo::Feature>
dense_dataset(const geo::BBox& region, const std::string& tid, const std::string& cid, const std::string& uid)
{
  std::vector<geo::Feature> out;
  for (const auto& t : geo::tiles_in_box(region, 2)) {
    auto sw = t.sw();
    double half = t.side() / 2;
    auto g = geo::Geometry::point({sw.lng + half, sw.lat + half});
    auto id = std::to_string(t.ix) + "_" + std::to_string(t.iy);
    out.push_back(geo::parse_feature(geo::make_feature_json(id, tid, uid, cid, g)));
  }
  return out;
}

namespace {

geo::GeoCoord
uniform_in(const geo::BBox& b, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> x(b.min.lng, b.max.lng), y(b.min.lat, b.max.lat);
  return {x(rng), y(rng)};
}

double
snap(double v, double step)
{
  return std::round(v / step) * step;
}

} // namespace

std::vector<geo::Feature>
sparse_dataset(const geo::BBox& region, const std::string& tid, const std::string& cid, const std::string& uid,
               const SparseOptions& options)
{
  std::mt19937_64 rng(options.seed);
  auto tiles = geo::tiles_in_box(region, 2);
  std::shuffle(tiles.begin(), tiles.end(), rng);
  auto keep = std::max<std::size_t>(1, static_cast<std::size_t>(options.non_void_fraction * tiles.size()));
  tiles.resize(std::min(keep, tiles.size()));
  std::uniform_int_distribution<std::size_t> pick(0, tiles.size() - 1);
  std::uniform_int_distribution<std::size_t> npts(1, std::max<std::size_t>(1, options.max_points));
  std::vector<geo::Feature> out;
  for (std::size_t i = 0; i < options.features; ++i) {
    std::vector<geo::GeoCoord> pts;
    auto n = npts(rng);
    for (std::size_t k = 0; k < n; ++k) {
      auto box = geo::tile_bbox(tiles[pick(rng)]);
      pts.push_back(uniform_in(box, rng));
    }
    auto g = pts.size() == 1 ? geo::Geometry::point(pts[0]) : geo::Geometry::multipoint(pts);
    out.push_back(geo::parse_feature(geo::make_feature_json("s" + std::to_string(i), tid, uid, cid, g)));
  }
  return out;
}

std::vector<geo::Feature>
random_dataset(const geo::BBox& region, const std::string& tid, const std::string& cid, const RandomOptions& o)
{
  std::mt19937_64 rng(o.seed);
  std::uniform_real_distribution<double> u(0, 1);
  std::uniform_int_distribution<std::size_t> who(0, o.uids.size() - 1);
  std::vector<geo::Feature> out;
  for (std::size_t i = 0; i < o.features; ++i) {
    auto c = uniform_in(region, rng);
    // some points sit exactly on level-1 / level-2 grid lines
    double r = u(rng);
    if (r < 0.05)
      c = {snap(c.lng, 0.1), snap(c.lat, 0.1)};
    else if (r < 0.1)
      c = {snap(c.lng, 0.01), c.lat};
    c.lng = std::clamp(c.lng, region.min.lng, region.max.lng - 1e-6);
    c.lat = std::clamp(c.lat, region.min.lat, region.max.lat - 1e-6);

    geo::Geometry g;
    double kind = u(rng);
    if (kind < o.multipoint_fraction) {
      std::vector<geo::GeoCoord> pts{c};
      std::uniform_int_distribution<int> extra(1, 3);
      std::normal_distribution<double> jitter(0, u(rng) < 0.3 ? 0.8 : 0.05);
      for (int k = extra(rng); k > 0; --k) {
        geo::GeoCoord p{c.lng + jitter(rng), c.lat + jitter(rng)};
        p.lng = std::clamp(p.lng, region.min.lng, region.max.lng - 1e-6);
        p.lat = std::clamp(p.lat, region.min.lat, region.max.lat - 1e-6);
        pts.push_back(p);
      }
      g = geo::Geometry::multipoint(pts);
    }
    else if (kind < o.multipoint_fraction + o.other_fraction) {
      std::uniform_real_distribution<double> side(0.001, 0.3);
      geo::BBox env{c, {std::min(c.lng + side(rng), region.max.lng - 1e-6), std::min(c.lat + side(rng), region.max.lat - 1e-6)}};
      if (env.max.lng <= env.min.lng || env.max.lat <= env.min.lat)
        env.max = {env.min.lng + 1e-6, env.min.lat + 1e-6};
      g = geo::Geometry::other(env);
    }
    else {
      g = geo::Geometry::point(c);
    }
    std::optional<geo::TimeInterval> vt;
    if (u(rng) < o.temporal_fraction) {
      std::uniform_int_distribution<std::int64_t> start(o.time_range.start, o.time_range.end);
      std::uniform_int_distribution<std::int64_t> len(0, u(rng) < 0.5 ? 3600 : 5 * 86400);
      auto s = start(rng);
      vt = geo::TimeInterval{s, s + len(rng)};
    }
    out.push_back(
      geo::parse_feature(geo::make_feature_json("r" + std::to_string(i), tid, o.uids[who(rng)], cid, g, vt)));
  }
  return out;
}

geo::BBox
random_square(const geo::BBox& region, double side, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> x(region.min.lng, region.max.lng - side);
  std::uniform_real_distribution<double> y(region.min.lat, region.max.lat - side);
  geo::GeoCoord sw{x(rng), y(rng)};
  return {sw, {sw.lng + side, sw.lat + side}};
}

geo::BBox
random_box(const geo::BBox& region, double max_side, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u(0, 1);
  double w = std::max(0.002, u(rng) * max_side);
  double h = std::max(0.002, u(rng) * max_side);
  std::uniform_real_distribution<double> x(region.min.lng, region.max.lng - w);
  std::uniform_real_distribution<double> y(region.min.lat, region.max.lat - h);
  geo::BBox b{{x(rng), y(rng)}, {0, 0}};
  if (u(rng) < 0.25)
    b.min = {snap(b.min.lng, 0.01), snap(b.min.lat, 0.01)};
  b.max = {b.min.lng + w, b.min.lat + h};
  if (u(rng) < 0.25)
    b.max = {snap(b.max.lng, 0.01), snap(b.max.lat, 0.01)};
  if (b.max.lng <= b.min.lng)
    b.max.lng = b.min.lng + 0.01;
  if (b.max.lat <= b.min.lat)
    b.max.lat = b.min.lat + 0.01;
  return b;
}

std::vector<engine::TileQuery>
tile_batch(const geo::BBox& region, int level, std::size_t n, const std::string& tid, const std::string& cid,
           std::mt19937_64& rng)
{
  auto tiles = geo::tiles_in_box(region, level);
  if (n > tiles.size())
    throw std::invalid_argument("tile_batch: more queries than tiles");
  std::shuffle(tiles.begin(), tiles.end(), rng);
  std::vector<engine::TileQuery> out;
  for (std::size_t i = 0; i < n; ++i)
    out.push_back({tiles[i], tid, cid, std::nullopt});
  return out;
}

std::vector<double>
area_sweep_km2()
{
  return {1, 10, 100, 1'000, 10'000, 100'000, 1'000'000};
}

std::vector<double>
poisson_gaps_s(double rate, std::size_t n, std::mt19937_64& rng)
{
  std::exponential_distribution<double> gap(rate);
  std::vector<double> out(n);
  for (auto& g : out)
    g = gap(rng);
  return out;
}

} // namespace ogb::perf
