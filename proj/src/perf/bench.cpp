#include "ogb/perf/bench.hpp"

#include "ogb/perf/workload.hpp"
#include "ogb/tess/geo_tess.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <ostream>
#include <thread>

namespace ogb::perf {

namespace {

double
seconds_since(std::chrono::steady_clock::time_point t0)
{
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

double
side_deg(double area_km2)
{
  return std::sqrt(area_km2) / 100.0;
}

Measurement
BatchPoint::measurement() const
{
  return {static_cast<double>(n_q), n_i, static_cast<double>(n_db), h, duration_ms, transmission_ms};
}

Lab::Lab(LabOptions options)
  : m_options(std::move(options))
{
  ClusterConfig c;
  c.engines = split_region(m_options.region, m_options.engines);
  c.bf_server = false;
  c.bandwidth_bps = m_options.bandwidth_bps;
  c.key_type = m_options.key_type;
  m_cluster = std::make_unique<Cluster>(c);
  auto user = m_cluster->make_user(m_options.tid, m_options.cid, "lab");
  {
    auto loader = m_cluster->frontend(user);
    auto t0 = std::chrono::steady_clock::now();
    auto data = dense_dataset(m_options.region, m_options.tid, m_options.cid, "lab");
    auto report = loader->insert(data);
    if (!report.ok())
      throw std::runtime_error("lab ingest rejected " + std::to_string(report.rejected.size()) + " objects");
    m_objects = data.size();
    m_ingest_s = seconds_since(t0);
  }
  m_cluster->set_cost(m_options.cost);
  frontend::FrontendOptions fo;
  fo.cost = m_options.cost;
  fo.parallelism = m_options.parallelism;
  fo.lifetime = Millis{30'000};
  m_frontend = m_cluster->frontend(user, fo);
}

Lab::~Lab()
{
  m_frontend.reset();
}

BatchPoint
Lab::run_batch(int level, std::size_t n_q, double h, std::mt19937_64& rng)
{
  auto batch = tile_batch(m_options.region, level, n_q, m_options.tid, m_options.cid, rng);
  m_cluster->clear_caches();
  auto warm = static_cast<std::size_t>(std::llround(h * static_cast<double>(n_q)));
  if (warm > 0) {
    std::vector<engine::TileQuery> hot(batch.begin(), batch.begin() + static_cast<std::ptrdiff_t>(warm));
    for (std::size_t i = 0; i < m_cluster->engine_count(); ++i)
      m_cluster->engine(i).prewarm(hot);
    std::shuffle(batch.begin(), batch.end(), rng);
  }
  auto r = m_frontend->tile_batch(batch, m_options.parallelism);

  BatchPoint p;
  p.n_db = m_cluster->engine_count();
  p.level = level;
  p.n_q = n_q;
  p.h = warm / static_cast<double>(n_q);
  p.n_i = static_cast<double>(r.items) / static_cast<double>(n_q);
  p.duration_ms = r.duration_ms;
  p.items = r.items;
  p.bytes = r.bytes;
  p.transmission_ms = m_options.bandwidth_bps > 0 ? static_cast<double>(r.bytes) * 8 / m_options.bandwidth_bps * 1000 : 0;
  ModelParams mp;
  mp.c1 = m_options.cost.c1_ms;
  mp.c2 = m_options.cost.c2_ms;
  mp.c3 = m_options.cost.c3_ms;
  mp.p_db = m_options.cost.p_db;
  mp.p_qh = 1 - mp.p_db;
  p.model_ms = predict(mp, p.measurement());
  return p;
}

void
write_batch_csv(std::ostream& os, const std::vector<BatchPoint>& points)
{
  os << "n_db,level,n_q,n_i,h,duration_ms,items,bytes,transmission_ms,model_ms\n";
  for (const auto& p : points)
    os << p.n_db << ',' << p.level << ',' << p.n_q << ',' << p.n_i << ',' << p.h << ',' << p.duration_ms << ','
       << p.items << ',' << p.bytes << ',' << p.transmission_ms << ',' << p.model_ms << '\n';
}

std::vector<BatchPoint>
tile_batch_sweep(Lab& lab, const std::vector<int>& levels, const std::vector<std::size_t>& n_qs, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<BatchPoint> out;
  for (int level : levels)
    for (auto n_q : n_qs)
      out.push_back(lab.run_batch(level, n_q, 0, rng));
  return out;
}

std::vector<BatchPoint>
cache_sweep(Lab& lab, int level, std::size_t n_q, const std::vector<double>& hs, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<BatchPoint> out;
  for (double h : hs)
    out.push_back(lab.run_batch(level, n_q, h, rng));
  return out;
}

RangeLab::RangeLab(RangeOptions options)
  : m_options(std::move(options))
{
  ClusterConfig c;
  c.engines = split_region(m_options.region, m_options.engines);
  c.bf_server = true;
  c.bf_capacity = std::max<std::size_t>(10'000, m_options.features * 4);
  c.bandwidth_bps = m_options.bandwidth_bps;
  c.key_type = m_options.key_type;
  m_cluster = std::make_unique<Cluster>(c);
  m_user = m_cluster->make_user("gtfs", "stops", "feed");
  SparseOptions so;
  so.features = m_options.features;
  so.non_void_fraction = m_options.non_void_fraction;
  so.seed = m_options.seed;
  auto data = sparse_dataset(m_options.region, "gtfs", "stops", "feed", so);
  auto loader = m_cluster->frontend(m_user);
  auto report = loader->insert(data);
  if (!report.ok())
    throw std::runtime_error("range lab ingest rejected objects");
  loader.reset();
  if (!m_cluster->flush_bloom(Millis{60'000}))
    throw std::runtime_error("BF updates did not settle");
  m_cluster->set_cost(m_options.cost);
}

RangeLab::~RangeLab() = default;

std::unique_ptr<frontend::Frontend>
RangeLab::frontend()
{
  frontend::FrontendOptions fo;
  fo.cost = m_options.cost;
  fo.lifetime = Millis{30'000};
  return m_cluster->frontend(m_user, fo);
}

frontend::RangeQuery
RangeLab::query(const geo::BBox& box, std::size_t k, bool use_bf) const
{
  frontend::RangeQuery q;
  q.bbox = box;
  q.tid = "gtfs";
  q.cid = "stops";
  q.k = k;
  q.use_bf = use_bf;
  return q;
}

std::vector<AreaPoint>
area_sweep(RangeLab& lab, const std::vector<double>& areas_km2, const std::vector<std::size_t>& ks,
           const std::vector<bool>& bf, std::size_t queries, std::uint64_t seed)
{
  auto fe = lab.frontend();
  std::vector<AreaPoint> out;
  for (double area : areas_km2) {
    double side = side_deg(area);
    for (auto k : ks)
      for (bool use_bf : bf) {
        std::mt19937_64 rng(seed);
        AreaPoint p;
        p.area_km2 = area;
        p.k = k;
        p.use_bf = use_bf;
        for (std::size_t n = 0; n < queries; ++n) {
          auto box = random_square(lab.options().region, side, rng);
          auto t0 = std::chrono::steady_clock::now();
          auto r = fe->range_query(lab.query(box, k, use_bf));
          p.mean_ms += seconds_since(t0) * 1000;
          p.mean_tiles += static_cast<double>(r.stats.tiles);
          p.mean_tiles_after_bf += static_cast<double>(r.stats.tiles_after_bf);
          p.mean_items += static_cast<double>(r.stats.items);
          p.mean_objects += static_cast<double>(r.objects.size());
          p.tessellation_ms += r.stats.tessellation_ms;
          p.bf_ms += r.stats.bf_ms;
          p.batch_ms += r.stats.batch_ms;
          p.postfilter_ms += r.stats.postfilter_ms;
        }
        double q = static_cast<double>(std::max<std::size_t>(1, queries));
        p.queries = queries;
        for (double* v : {&p.mean_ms, &p.mean_tiles, &p.mean_tiles_after_bf, &p.mean_items, &p.mean_objects,
                          &p.tessellation_ms, &p.bf_ms, &p.batch_ms, &p.postfilter_ms})
          *v /= q;
        out.push_back(p);
      }
  }
  return out;
}

void
write_area_csv(std::ostream& os, const std::vector<AreaPoint>& points)
{
  os << "area_km2,k,use_bf,queries,mean_ms,mean_tiles,mean_tiles_after_bf,mean_items,mean_objects,"
        "tessellation_ms,bf_ms,batch_ms,postfilter_ms\n";
  for (const auto& p : points)
    os << p.area_km2 << ',' << p.k << ',' << p.use_bf << ',' << p.queries << ',' << p.mean_ms << ',' << p.mean_tiles
       << ',' << p.mean_tiles_after_bf << ',' << p.mean_items << ',' << p.mean_objects << ',' << p.tessellation_ms
       << ',' << p.bf_ms << ',' << p.batch_ms << ',' << p.postfilter_ms << '\n';
}

double
BenchmarkRun::mean() const
{
  if (latencies_ms.empty())
    return 0;
  return std::accumulate(latencies_ms.begin(), latencies_ms.end(), 0.0) / static_cast<double>(latencies_ms.size());
}

BenchmarkRun
poisson_run(RangeLab& lab, double rate, double window_s, double area_km2, std::size_t workers, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::vector<double> arrivals;
  for (double t = 0;;) {
    t += poisson_gaps_s(rate, 1, rng)[0];
    if (t > window_s)
      break;
    arrivals.push_back(t);
  }
  std::vector<geo::BBox> boxes;
  for (std::size_t i = 0; i < arrivals.size(); ++i)
    boxes.push_back(random_square(lab.options().region, side_deg(area_km2), rng));

  workers = std::max<std::size_t>(1, workers);
  std::vector<std::unique_ptr<frontend::Frontend>> fes;
  for (std::size_t w = 0; w < workers; ++w)
    fes.push_back(lab.frontend());
  // each worker records into its own slots; merged after join
  std::vector<double> latency(arrivals.size(), 0);
  std::atomic<std::size_t> next{0};
  auto start = std::chrono::steady_clock::now() + std::chrono::milliseconds(20);
  std::vector<std::thread> threads;
  for (std::size_t w = 0; w < workers; ++w)
    threads.emplace_back([&, w] {
      for (;;) {
        auto i = next.fetch_add(1);
        if (i >= arrivals.size())
          return;
        auto due = start + std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                             std::chrono::duration<double>(arrivals[i]));
        std::this_thread::sleep_until(due);
        try {
          fes[w]->range_query(lab.query(boxes[i], 50, true));
        }
        catch (const std::exception&) {
        }
        latency[i] = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - due).count();
      }
    });
  for (auto& t : threads)
    t.join();
  fes.clear();

  BenchmarkRun run;
  run.workload = "poisson range-query " + std::to_string(area_km2) + " km2";
  run.rate = rate;
  run.latencies_ms = std::move(latency);
  run.duration_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return run;
}

std::vector<TessPoint>
tessellation_sweep(const std::vector<double>& areas_km2, const std::vector<std::size_t>& ks, std::size_t queries,
                   std::uint64_t seed)
{
  const geo::BBox region{{-10, 35}, {30, 70}};
  std::vector<TessPoint> out;
  for (double area : areas_km2)
    for (auto k : ks) {
      std::mt19937_64 rng(seed);
      TessPoint p;
      p.area_km2 = area;
      p.k = k;
      p.queries = queries;
      for (std::size_t n = 0; n < queries; ++n) {
        auto box = random_square(region, side_deg(area), rng);
        auto t0 = std::chrono::steady_clock::now();
        auto t = tess::tessellate_box(box, k);
        p.mean_ms += seconds_since(t0) * 1000;
        p.mean_tiles += static_cast<double>(t.tiles.size());
        p.mean_stretch_excess += t.stretch - 1;
        p.fallback_fraction += t.constraint_respected ? 0 : 1;
      }
      double q = static_cast<double>(std::max<std::size_t>(1, queries));
      p.mean_ms /= q;
      p.mean_tiles /= q;
      p.mean_stretch_excess /= q;
      p.fallback_fraction /= q;
      out.push_back(p);
    }
  return out;
}

void
write_tess_csv(std::ostream& os, const std::vector<TessPoint>& points)
{
  os << "area_km2,k,queries,mean_tiles,mean_stretch_excess,fallback_fraction,mean_ms\n";
  for (const auto& p : points)
    os << p.area_km2 << ',' << p.k << ',' << p.queries << ',' << p.mean_tiles << ',' << p.mean_stretch_excess << ','
       << p.fallback_fraction << ',' << p.mean_ms << '\n';
}

} // namespace ogb::perf
