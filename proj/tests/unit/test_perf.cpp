#include "doctest.h"

#include "ogb/perf/model.hpp"
#include "ogb/perf/workload.hpp"

#include <numeric>
#include <random>
#include <set>

using namespace ogb;
using namespace ogb::perf;

namespace {

std::vector<Measurement>
synthetic(const ModelParams& truth, double noise, std::uint64_t seed)
{
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> eps(0, noise);
  std::vector<Measurement> out;
  for (double nq : {100, 250, 500, 750, 1000})
    for (double ni : {1, 100})
      for (double ndb : {1, 4})
        for (double h : {0.0, 0.5}) {
          ModelParams p = truth;
          p.n_q = nq;
          p.n_i = ni;
          p.n_db = ndb;
          p.h = h;
          Measurement m{nq, ni, ndb, h, 0, model_transmission(p)};
          m.duration_ms = model_tb(p) * (1 + eps(rng));
          out.push_back(m);
        }
  return out;
}

bool
inside(const geo::BBox& outer, const geo::BBox& b)
{
  return b.min.lng >= outer.min.lng && b.min.lat >= outer.min.lat && b.max.lng <= outer.max.lng &&
         b.max.lat <= outer.max.lat;
}

} // namespace

TEST_SUITE("perf.model")
{
  TEST_CASE("per tile-query time")
  {
    ModelParams p;
    p.n_i = 1;
    CHECK(model_tq(p) == doctest::Approx(3.008));
    p.n_i = 0;
    CHECK(model_tq(p) == p.c1);
    p.n_i = 100;
    CHECK(model_tq(p) == doctest::Approx(3.8));
  }

  TEST_CASE("batch duration")
  {
    ModelParams p;
    p.n_q = 500;
    p.n_db = 4;
    p.n_i = 100;
    CHECK(model_tb(p) == doctest::Approx(818.75).epsilon(1e-12));
    CHECK(model_transmission(p) == doctest::Approx(110));

    ModelParams limit = p;
    limit.h = 1;
    limit.p_db = 1;
    limit.p_qh = 0;
    CHECK(model_tb(limit) == doctest::Approx(limit.c3 + model_transmission(limit)));

    ModelParams wide = p;
    wide.n_db = 1e12;
    CHECK(model_tb(wide) ==
          doctest::Approx(p.c3 + p.n_q * p.p_qh * model_tq(p) + model_transmission(p)).epsilon(1e-9));

    ModelParams bad = p;
    bad.p_qh = 0.2;
    CHECK_THROWS_AS(model_tb(bad), std::invalid_argument);
    bad = p;
    bad.h = 1.5;
    CHECK_THROWS_AS(model_tb(bad), std::invalid_argument);
  }

  TEST_CASE("monotonicity")
  {
    std::mt19937_64 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (int n = 0; n < 500; ++n) {
      ModelParams p;
      p.c1 = 10 * u(rng);
      p.c2 = 0.1 * u(rng);
      p.c3 = 50 * u(rng);
      p.p_db = u(rng);
      p.p_qh = 1 - p.p_db;
      p.h = u(rng);
      p.n_db = 1 + std::floor(8 * u(rng));
      p.n_q = std::floor(1000 * u(rng));
      p.n_i = std::floor(200 * u(rng));
      double base = model_tb(p);
      auto bump = [&](double ModelParams::*field, double by) {
        ModelParams q = p;
        q.*field += by;
        return model_tb(q);
      };
      CHECK(bump(&ModelParams::h, (1 - p.h) * u(rng)) <= base + 1e-9);
      CHECK(bump(&ModelParams::n_db, 1) <= base + 1e-9);
      CHECK(bump(&ModelParams::n_q, 1) >= base - 1e-9);
      CHECK(bump(&ModelParams::n_i, 1) >= base - 1e-9);
    }
  }

  TEST_CASE("one 10x10 tile-query beats a hundred 1x1 ones")
  {
    ModelParams big;
    big.n_q = 1;
    big.n_i = 100;
    ModelParams small;
    small.n_q = 100;
    small.n_i = 1;
    CHECK(model_tb(big) < model_tb(small));
  }

  TEST_CASE("fit recovers exact model data")
  {
    ModelParams truth;
    auto fit = fit_constants(synthetic(truth, 0, 1));
    CHECK(std::abs(fit.params.c1 - truth.c1) < 1e-9);
    CHECK(std::abs(fit.params.c2 - truth.c2) < 1e-9);
    CHECK(std::abs(fit.params.c3 - truth.c3) < 1e-9);
    CHECK(std::abs(fit.params.p_db - truth.p_db) < 1e-9);
    CHECK(fit.params.p_qh == doctest::Approx(1 - fit.params.p_db));
    CHECK(fit.r2 == doctest::Approx(1.0));
  }

  TEST_CASE("fit tolerates 5% noise")
  {
    ModelParams truth;
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
      auto fit = fit_constants(synthetic(truth, 0.05, seed));
      CAPTURE(seed);
      CHECK(fit.params.c1 == doctest::Approx(truth.c1).epsilon(0.15));
      CHECK(fit.params.c2 == doctest::Approx(truth.c2).epsilon(0.15));
      CHECK(fit.params.p_db == doctest::Approx(truth.p_db).epsilon(0.15));
      CHECK(fit.r2 > 0.9);
    }
  }

  TEST_CASE("fit rejects unidentifiable designs")
  {
    ModelParams truth;
    auto data = synthetic(truth, 0, 1);
    std::vector<Measurement> one_engine;
    for (const auto& m : data)
      if (m.n_db == 1 && m.h == 0)
        one_engine.push_back(m);
    CHECK_THROWS_AS(fit_constants(one_engine), FitError);
    CHECK_THROWS_AS(fit_constants({data[0], data[0], data[0]}), FitError);
  }
}

TEST_SUITE("perf.workload")
{
  TEST_CASE("dense lab dataset")
  {
    geo::BBox region{{10, 40}, {14, 44}};
    auto d = dense_dataset(region, "t", "c", "u");
    CHECK(d.size() == 160'000);
    CHECK(d[0].json.size() < 200);
    std::set<std::string> ids;
    for (std::size_t i = 0; i < d.size(); i += 101)
      ids.insert(d[i].oid);
    CHECK(ids.size() == (d.size() + 100) / 101);
  }

  TEST_CASE("Poisson gaps")
  {
    std::mt19937_64 rng(8);
    for (double rate : {5.0, 200.0}) {
      auto g = poisson_gaps_s(rate, 10'000, rng);
      double mean = std::accumulate(g.begin(), g.end(), 0.0) / static_cast<double>(g.size());
      CHECK(mean == doctest::Approx(1 / rate).epsilon(0.05));
    }
  }

  TEST_CASE("query streams")
  {
    std::mt19937_64 rng(2);
    geo::BBox region{{10, 40}, {14, 44}};
    auto b = tile_batch(region, 2, 1000, "t", "c", rng);
    std::set<geo::TileId> tiles;
    for (const auto& q : b) {
      tiles.insert(q.tile);
      CHECK(q.tile.level == 2);
      CHECK(inside(region, geo::tile_bbox(q.tile)));
    }
    CHECK(tiles.size() == 1000);
    for (int i = 0; i < 100; ++i) {
      auto sq = random_square(region, 0.5, rng);
      CHECK(sq.max.lng - sq.min.lng == doctest::Approx(0.5));
      CHECK(inside(region, sq));
    }
    auto areas = area_sweep_km2();
    CHECK(std::is_sorted(areas.begin(), areas.end()));
    CHECK(areas.front() == 1);
    CHECK(areas.back() == 1e6);
  }

  TEST_CASE("sparse dataset non-void fraction")
  {
    geo::BBox region{{10, 40}, {12, 42}};
    SparseOptions so;
    so.features = 500;
    so.non_void_fraction = 0.01;
    auto d = sparse_dataset(region, "t", "c", "u", so);
    std::set<geo::TileId> used;
    for (const auto& f : d)
      for (const auto& t : geo::intersecting_tiles(f.geometry, 2))
        used.insert(t);
    CHECK(used.size() <= 400);
    CHECK(used.size() > 300);
  }
}

TEST_SUITE("perf.rate")
{
  TEST_CASE("Mann-Kendall")
  {
    std::vector<double> up, flat;
    std::mt19937_64 rng(1);
    std::normal_distribution<double> noise(0, 1);
    for (int i = 0; i < 300; ++i) {
      up.push_back(0.05 * i + noise(rng));
      flat.push_back(10 + noise(rng));
    }
    auto t = mann_kendall(up);
    CHECK(t.p_increasing < 0.001);
    CHECK(t.slope == doctest::Approx(0.05).epsilon(0.3));
    CHECK(stable(flat));
    CHECK_FALSE(stable(up));
    std::vector<double> ties(50, 3.0);
    CHECK(stable(ties));
  }

  TEST_CASE("bisection brackets the capacity")
  {
    const double capacity = 137;
    std::mt19937_64 rng(3);
    std::normal_distribution<double> noise(0, 0.5);
    auto probe = [&](double rate) {
      std::vector<double> lat;
      double backlog = 0;
      for (int i = 0; i < 400; ++i) {
        backlog = std::max(0.0, backlog + (rate - capacity) / capacity);
        lat.push_back(5 + backlog + noise(rng));
      }
      return lat;
    };
    auto r = max_rate_search(probe, 10, 1370, 2);
    CHECK(r.rate <= capacity + 2);
    CHECK(r.unstable >= capacity - 2);
    CHECK(r.unstable - r.rate <= 2);
    CHECK(r.probes.front() == std::pair<double, bool>{10, true});
    CHECK(r.probes[1] == std::pair<double, bool>{1370, false});
  }
}
