#pragma once

#include "ogb/perf/cluster.hpp"
#include "ogb/perf/model.hpp"

#include <iosfwd>
#include <random>

namespace ogb::perf {

/// Dense laboratory deployment: one point per level-2 tile of a level-0
/// aligned region, spread over n engines, cost emulation on.
struct LabOptions
{
  geo::BBox region{{10, 40}, {14, 44}};
  std::size_t engines = 4;
  double bandwidth_bps = 200e6;
  CostModel cost{true};
  std::size_t parallelism = 32;
  icn::SignatureType key_type = icn::SignatureType::HmacSha256;
  std::string tid = "lab";
  std::string cid = "points";
};

struct BatchPoint
{
  std::size_t n_db = 0;
  int level = 2;
  std::size_t n_q = 0;
  double n_i = 0;
  double h = 0;
  double duration_ms = 0;
  std::size_t items = 0;
  std::size_t bytes = 0;
  double transmission_ms = 0;
  /// Eq. 2 with the default constants and the measured transmission.
  double model_ms = 0;

  Measurement
  measurement() const;
};

class Lab
{
public:
  explicit Lab(LabOptions options);
  ~Lab();

  /// One tile-query batch of n_q distinct tiles at `level` with a fraction
  /// h of them pre-warmed in the engine caches.
  BatchPoint
  run_batch(int level, std::size_t n_q, double h, std::mt19937_64& rng);

  Cluster& cluster() { return *m_cluster; }
  frontend::Frontend& frontend() { return *m_frontend; }
  const LabOptions& options() const { return m_options; }
  double ingest_seconds() const { return m_ingest_s; }
  std::size_t objects() const { return m_objects; }

private:
  LabOptions m_options;
  std::unique_ptr<Cluster> m_cluster;
  std::unique_ptr<frontend::Frontend> m_frontend;
  double m_ingest_s = 0;
  std::size_t m_objects = 0;
};

void
write_batch_csv(std::ostream& os, const std::vector<BatchPoint>& points);

/// Tile-batch sweep on one lab: every (level, n_q) at H = 0.
std::vector<BatchPoint>
tile_batch_sweep(Lab& lab, const std::vector<int>& levels, const std::vector<std::size_t>& n_qs,
                 std::uint64_t seed = 1);

/// Batch duration as a function of the cache hit probability.
std::vector<BatchPoint>
cache_sweep(Lab& lab, int level, std::size_t n_q, const std::vector<double>& hs, std::uint64_t seed = 1);

/// Sparse deployment for range-query benchmarks.
struct RangeOptions
{
  geo::BBox region{{0, 40}, {16, 56}};
  std::size_t engines = 4;
  std::size_t features = 20'000;
  double non_void_fraction = 0.01;
  double bandwidth_bps = 200e6;
  CostModel cost{};
  icn::SignatureType key_type = icn::SignatureType::HmacSha256;
  std::uint64_t seed = 1;
};

class RangeLab
{
public:
  explicit RangeLab(RangeOptions options);
  ~RangeLab();

  Cluster& cluster() { return *m_cluster; }
  /// A fresh front-end for one worker.
  std::unique_ptr<frontend::Frontend>
  frontend();
  frontend::RangeQuery
  query(const geo::BBox& box, std::size_t k, bool use_bf) const;
  const RangeOptions& options() const { return m_options; }

private:
  RangeOptions m_options;
  std::unique_ptr<Cluster> m_cluster;
  trust::Identity m_user;
};

struct AreaPoint
{
  double area_km2 = 0;
  std::size_t k = 0;
  bool use_bf = false;
  std::size_t queries = 0;
  double mean_ms = 0;
  double mean_tiles = 0;
  double mean_tiles_after_bf = 0;
  double mean_items = 0;
  double mean_objects = 0;
  double tessellation_ms = 0;
  double bf_ms = 0;
  double batch_ms = 0;
  double postfilter_ms = 0;
};

std::vector<AreaPoint>
area_sweep(RangeLab& lab, const std::vector<double>& areas_km2, const std::vector<std::size_t>& ks,
           const std::vector<bool>& bf, std::size_t queries, std::uint64_t seed = 1);

void
write_area_csv(std::ostream& os, const std::vector<AreaPoint>& points);

/// Latencies of an open-loop Poisson stream of range queries; each sample
/// is completion time minus scheduled arrival.
struct BenchmarkRun
{
  std::string workload;
  double rate = 0;
  std::vector<double> latencies_ms;

  double mean() const;
  double duration_ms = 0;
};

BenchmarkRun
poisson_run(RangeLab& lab, double rate, double window_s, double area_km2, std::size_t workers,
            std::uint64_t seed = 1);

struct TessPoint
{
  double area_km2 = 0;
  std::size_t k = 0;
  std::size_t queries = 0;
  double mean_tiles = 0;
  double mean_stretch_excess = 0;
  double fallback_fraction = 0;
  double mean_ms = 0;
};

/// Tessellation cost and stretch for randomly centred squares of each area
/// (1 degree taken as 100 km).
std::vector<TessPoint>
tessellation_sweep(const std::vector<double>& areas_km2, const std::vector<std::size_t>& ks, std::size_t queries,
                   std::uint64_t seed = 1);

void
write_tess_csv(std::ostream& os, const std::vector<TessPoint>& points);

/// Side in degrees of a square of the given area.
double
side_deg(double area_km2);

} // namespace ogb::perf
