#pragma once

#include "ogb/engine/objects.hpp"

#include <random>

namespace ogb::perf {

/// One point feature at the centre of every level-2 tile of a region.
std::vector<geo::Feature>
dense_dataset(const geo::BBox& region, const std::string& tid, const std::string& cid, const std::string& uid);

struct SparseOptions
{
  std::size_t features = 1000;
  /// Fraction of the region's level-2 tiles that hold data.
  double non_void_fraction = 0.01;
  std::size_t max_points = 4;
  std::uint64_t seed = 1;
};

/// Multipoint features drawn inside a fixed random subset of level-2 tiles.
std::vector<geo::Feature>
sparse_dataset(const geo::BBox& region, const std::string& tid, const std::string& cid, const std::string& uid,
               const SparseOptions& options);

struct RandomOptions
{
  std::size_t features = 1000;
  std::vector<std::string> uids{"alice"};
  /// Fractions of multipoint and envelope (polygon) geometries; the rest are points.
  double multipoint_fraction = 0.2;
  double other_fraction = 0.1;
  /// Fraction of features carrying a validity interval.
  double temporal_fraction = 0.5;
  /// Range of validity starts, epoch seconds.
  geo::TimeInterval time_range{1'500'000'000, 1'500'000'000 + 30 * 86400};
  std::uint64_t seed = 1;
};

/// Mixed geometries, some on exact grid lines, some spanning level-0 tiles.
std::vector<geo::Feature>
random_dataset(const geo::BBox& region, const std::string& tid, const std::string& cid, const RandomOptions& options);

/// Square box of the given side centred uniformly so that it stays inside region.
geo::BBox
random_square(const geo::BBox& region, double side_deg, std::mt19937_64& rng);

/// Box with random extent up to max_side, sometimes snapped to the level-2 grid.
geo::BBox
random_box(const geo::BBox& region, double max_side_deg, std::mt19937_64& rng);

/// n distinct tile-queries of a level drawn uniformly from the region.
std::vector<engine::TileQuery>
tile_batch(const geo::BBox& region, int level, std::size_t n, const std::string& tid, const std::string& cid,
           std::mt19937_64& rng);

/// Areas (km^2) of the range-query sweep.
std::vector<double>
area_sweep_km2();

/// Exponential inter-arrival gaps of a Poisson stream with rate per second.
std::vector<double>
poisson_gaps_s(double rate, std::size_t n, std::mt19937_64& rng);

} // namespace ogb::perf
