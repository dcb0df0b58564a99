#include "doctest.h"

#include "ogb/tess/geo_tess.hpp"

#include <random>

using namespace ogb;
using namespace ogb::tess;

namespace {

/// Exhaustive oracle: every subset of the minimum stretch tree nodes that
/// is pairwise disjoint and covers every finest cell of the region.
double
subset_enumeration_optimum(const GridSpec& spec, const Region& region, std::size_t k)
{
  auto tree = min_stretch_tree(spec, region);
  std::vector<Cell> universe;
  for (const auto& [c, kids] : tree.nodes)
    universe.push_back(c);
  auto finest = min_stretch_tiles(spec, region);
  REQUIRE(universe.size() <= 20);
  double best = std::numeric_limits<double>::infinity();
  for (std::uint32_t mask = 1; mask < (1u << universe.size()); ++mask) {
    std::vector<Cell> pick;
    for (std::size_t i = 0; i < universe.size(); ++i)
      if (mask & (1u << i))
        pick.push_back(universe[i]);
    if (pick.size() > k)
      continue;
    bool ok = true;
    for (std::size_t a = 0; a < pick.size() && ok; ++a)
      for (std::size_t b = 0; b < pick.size() && ok; ++b)
        ok = a == b || !is_ancestor(spec, pick[a], pick[b]);
    for (const auto& f : finest) {
      if (!ok)
        break;
      ok = std::any_of(pick.begin(), pick.end(),
                       [&](const Cell& p) { return p == f || is_ancestor(spec, p, f); });
    }
    if (!ok)
      continue;
    double area = 0;
    for (const auto& p : pick)
      area += spec.cell_area(p.level);
    best = std::min(best, area);
  }
  return best;
}

bool
disjoint(const GridSpec& spec, const std::vector<Cell>& tiles)
{
  std::set<Cell> all(tiles.begin(), tiles.end());
  if (all.size() != tiles.size())
    return false;
  for (const auto& t : tiles) {
    auto c = t;
    while (c.level > 0) {
      c = parent(spec, c);
      if (all.contains(c))
        return false;
    }
  }
  return true;
}

/// Tiles are disjoint, so they cover the region iff their overlaps add up
/// to the region area.
bool
covers(const GridSpec& spec, const Region& region, const std::vector<Cell>& tiles)
{
  double sum = 0;
  for (const auto& t : tiles)
    sum += region.overlap(spec, t);
  return std::abs(sum - region.area()) <= 1e-9 * region.area();
}

BoxRegion
random_box(std::mt19937& rng, double max_side)
{
  std::uniform_real_distribution<double> pos(-5000, 5000), side(0.5, max_side);
  double x = pos(rng), y = pos(rng);
  return BoxRegion(x, y, x + side(rng), y + side(rng));
}

CellSetRegion
fixture_region()
{
  std::set<std::pair<std::int64_t, std::int64_t>> cells;
  auto add_block = [&](std::int64_t x0, std::int64_t y0, std::int64_t w, std::int64_t h) {
    for (auto x = x0; x < x0 + w; ++x)
      for (auto y = y0; y < y0 + h; ++y)
        cells.insert({x, y});
  };
  // level-0 cell (0,0): two full quadrants and three cells of a third
  add_block(0, 0, 4, 2);
  cells.insert({2, 2});
  cells.insert({3, 2});
  cells.insert({3, 3});
  // level-0 cell (1,0): one full quadrant, two half quadrants and one cell
  add_block(4, 0, 2, 2);
  add_block(6, 0, 2, 1);
  add_block(4, 2, 1, 2);
  cells.insert({7, 3});
  return CellSetRegion(cells);
}

} // namespace

TEST_SUITE("tess.basic")
{
  TEST_CASE("min_stretch examples")
  {
    auto t = min_stretch_box({{12, 41}, {12.5, 41.5}});
    CHECK(t.tiles.size() == 2500);
    CHECK(t.stretch == doctest::Approx(1));

    auto one = min_stretch_box({{12.51, 41.89}, {12.52, 41.90}});
    CHECK(one.tiles.size() == 1);
    CHECK(one.stretch == doctest::Approx(1));

    auto four = min_stretch_box({{12.505, 41.895}, {12.515, 41.905}});
    CHECK(four.tiles.size() == 4);
    double tiles_area = 4 * 0.01 * 0.01;
    double query_area = 0.01 * 0.01;
    CHECK(four.stretch == doctest::Approx(tiles_area / query_area));
  }

  TEST_CASE("tile_stretch examples")
  {
    auto spec = GridSpec::geo();
    BoxRegion q(0, 0, 100, 100);
    CHECK(tile_stretch(spec, q, {2, 5, 5}) == doctest::Approx(1));
    BoxRegion corner(5, 5, 100, 100);
    CHECK(tile_stretch(spec, corner, {1, 0, 0}) == doctest::Approx(4));
    CHECK_THROWS(tile_stretch(spec, q, {2, 500, 500}));
  }

  TEST_CASE("mst_reduce examples")
  {
    auto spec = GridSpec::geo();
    BoxRegion level1(10, 10, 20, 20);
    auto reduced = mst_reduce(spec, min_stretch_tree(spec, level1));
    CHECK(reduced.leaves() == std::vector<Cell>{{1, 1, 1}});

    std::set<std::pair<std::int64_t, std::int64_t>> cells;
    for (int x = 10; x < 20; ++x)
      for (int y = 10; y < 20; ++y)
        if (!(x == 19 && y == 19))
          cells.insert({x, y});
    CellSetRegion ninety_nine(cells);
    auto tree = min_stretch_tree(spec, ninety_nine);
    auto before = tree.leaves();
    CHECK(mst_reduce(spec, tree).leaves() == before);

    BoxRegion degree(0, 0, 100, 100);
    auto whole = mst_reduce(spec, min_stretch_tree(spec, degree));
    CHECK(whole.leaves() == std::vector<Cell>{{0, 0, 0}});
    CHECK(make_tessellation(spec, degree, whole.leaves()).stretch == doctest::Approx(1));
  }

  TEST_CASE("property: top-down MST equals bottom-up reduction")
  {
    auto spec = GridSpec::geo();
    std::mt19937 rng(5);
    for (int i = 0; i < 100; ++i) {
      auto q = random_box(rng, 150);
      CHECK(mst_tree(spec, q).leaves() == mst_reduce(spec, min_stretch_tree(spec, q)).leaves());
    }
    auto quad = GridSpec::quad();
    for (int i = 0; i < 100; ++i) {
      auto q = random_box(rng, 9);
      CHECK(mst_tree(quad, q).leaves() == mst_reduce(quad, min_stretch_tree(quad, q)).leaves());
    }
  }
}

TEST_SUITE("tess.constrained")
{
  TEST_CASE("single tile")
  {
    auto t = tessellate_box({{12.51, 41.89}, {12.52, 41.90}}, 1);
    REQUIRE(t.tiles.size() == 1);
    CHECK(t.tiles[0] == geo::tile_at({12.51, 41.89}, 2));
    CHECK(t.stretch == doctest::Approx(1));
    CHECK(t.constraint_respected);
  }

  TEST_CASE("level-ratio 4 worked instance: 27/20")
  {
    auto spec = GridSpec::quad();
    auto region = fixture_region();
    CHECK(region.area() == 20);
    CHECK(min_stretch(spec, region).stretch == doctest::Approx(1));

    std::vector<std::pair<Cell, double>> steps;
    ConstrainedOptions opt;
    opt.on_collapse = [&](const Cell& c, double s) { steps.emplace_back(c, s); };
    auto t = constrained(spec, region, 6, opt);
    CHECK(t.tiles.size() == 6);
    CHECK(t.covered_area == 27);
    CHECK(t.stretch == doctest::Approx(27.0 / 20.0));
    REQUIRE(steps.size() == 2);
    CHECK(steps[0].first.level == 0);
    CHECK(steps[0].second == doctest::Approx(16.0 / 11.0));
    CHECK(steps[0].second == doctest::Approx(1.45).epsilon(0.01));
    CHECK(steps[1].first.level == 1);
    CHECK(steps[1].second == doctest::Approx(2));

    // the two level-1 candidates tie at stretch 2
    int ties = 0;
    for (const auto& c : mst_tree(spec, region).nodes)
      if (c.first.level == 1 && !c.second.empty() && tile_stretch(spec, region, c.first) == 2)
        ++ties;
    CHECK(ties == 2);
    CHECK(brute_force_optimal(spec, region, 6).covered_area == 27);
  }

  TEST_CASE("brute force examples")
  {
    auto spec = GridSpec::geo();
    auto one = brute_force_optimal(spec, BoxRegion(51, 89, 52, 90), 3);
    CHECK(one.tiles == std::vector<Cell>{{2, 51, 89}});

    BoxRegion two_by_two(51, 81, 53, 83);
    auto t = brute_force_optimal(spec, two_by_two, 1);
    CHECK(t.tiles == std::vector<Cell>{{1, 5, 8}});
    CHECK(t.stretch == doctest::Approx(100.0 / 4.0));

    auto aligned = brute_force_optimal(spec, BoxRegion(10, 10, 20, 20), 100);
    CHECK(aligned.stretch == doctest::Approx(1));
    CHECK_THROWS_AS(brute_force_optimal(spec, BoxRegion(0, 0, 300, 300), 10, 1000), InstanceTooLarge);
  }

  TEST_CASE("dynamic programme agrees with subset enumeration")
  {
    auto spec = GridSpec::quad();
    std::mt19937 rng(11);
    int checked = 0;
    for (int trial = 0; trial < 300; ++trial) {
      std::set<std::pair<std::int64_t, std::int64_t>> cells;
      std::uniform_int_distribution<int> coord(0, 5), count(1, 6);
      for (int i = count(rng); i > 0; --i)
        cells.insert({coord(rng), coord(rng)});
      CellSetRegion region(cells);
      if (min_stretch_tree(spec, region).nodes.size() > 20)
        continue;
      for (std::size_t k = 1; k <= 6; ++k) {
        auto dp = brute_force_optimal(spec, region, k);
        if (!dp.constraint_respected)
          continue;
        CHECK(dp.covered_area == subset_enumeration_optimum(spec, region, k));
        CHECK(dp.tiles.size() <= k);
        CHECK(disjoint(spec, dp.tiles));
        CHECK(covers(spec, region, dp.tiles));
        ++checked;
      }
    }
    CHECK(checked > 100);
  }

  TEST_CASE("random 0.35 degree boxes with k=4")
  {
    std::mt19937 rng(13);
    std::uniform_real_distribution<double> lng(-170, 170), lat(-80, 80);
    auto spec = GridSpec::geo();
    for (int i = 0; i < 30; ++i) {
      geo::BBox box{{lng(rng), lat(rng)}, {}};
      box.max = {box.min.lng + 0.35, box.min.lat + 0.35};
      auto region = geo_region(box);
      auto g = constrained(spec, region, 4);
      auto opt = brute_force_optimal(spec, region, 4);
      CHECK(covers(spec, region, g.tiles));
      if (g.constraint_respected)
        CHECK(g.tiles.size() <= 4);
      CHECK(g.stretch >= opt.stretch - 1e-9);
    }
  }

  TEST_CASE("property: coverage, disjointness, constraint, monotone shape, determinism")
  {
    auto spec = GridSpec::geo();
    std::mt19937 rng(17);
    for (std::size_t k : {1, 5, 19, 50, 100}) {
      for (int i = 0; i < 60; ++i) {
        auto q = random_box(rng, 400);
        auto t = constrained(spec, q, k);
        CHECK(disjoint(spec, t.tiles));
        CHECK(covers(spec, q, t.tiles));
        CHECK(t.stretch >= 1 - 1e-12);
        if (t.constraint_respected)
          CHECK(t.tiles.size() <= k);
        else
          CHECK(t.tiles.size() == q.level0(spec).size());
        CHECK(static_cast<std::int64_t>(t.tiles.size()) <= min_stretch_count(spec, q));
        CHECK(constrained(spec, q, k).tiles == t.tiles);
      }
    }
  }

  TEST_CASE("property: greedy never beats the optimum")
  {
    auto spec = GridSpec::geo();
    std::mt19937 rng(19);
    int equal = 0, total = 0;
    for (int i = 0; i < 200; ++i) {
      auto q = random_box(rng, 40);
      std::size_t k = 2 + rng() % 20;
      auto g = constrained(spec, q, k);
      auto o = brute_force_optimal(spec, q, k);
      CHECK(g.covered_area >= o.covered_area - 1e-9);
      ++total;
      equal += std::abs(g.covered_area - o.covered_area) < 1e-9 ? 1 : 0;
    }
    MESSAGE("greedy optimal on " << equal << "/" << total);
    CHECK(equal >= total * 9 / 10);
  }

  TEST_CASE("fallback to the level-0 cover")
  {
    auto t = tessellate_box({{10.5, 40.5}, {15.5, 45.5}}, 5);
    CHECK_FALSE(t.constraint_respected);
    CHECK(t.tiles.size() == 36);
  }
}

TEST_SUITE("tess.temporal")
{
  TEST_CASE("one aligned ten-minute period")
  {
    auto p = temporal_decompose({600, 1200});
    REQUIRE(p.periods.size() == 1);
    CHECK(p.periods[0] == Period{10, 10});
    CHECK(p.constraint_respected);
  }

  TEST_CASE("one hour")
  {
    auto p = temporal_decompose({0, 3600});
    CHECK(p.constraint_respected);
    CHECK(p.periods.size() <= 5);
    // with a 1-D aligned oracle: the best cover with <= 5 periods is one 100-minute slot
    CHECK(p.periods == std::vector<Period>{{100, 0}});
  }

  TEST_CASE("fallback to 10000-minute periods")
  {
    auto p = temporal_decompose({0, 70000 * 60});
    CHECK_FALSE(p.constraint_respected);
    CHECK(p.periods.size() == 7);
    for (const auto& period : p.periods)
      CHECK(period.size_minutes == 10000);
  }

  TEST_CASE("property: cover, disjoint, aligned, at most 5 periods")
  {
    std::mt19937 rng(23);
    std::uniform_int_distribution<std::int64_t> start(1'400'000'000, 1'600'000'000);
    for (int i = 0; i < 2000; ++i) {
      auto s = start(rng);
      auto len = static_cast<std::int64_t>(std::pow(10.0, std::uniform_real_distribution<double>(1, 5.5)(rng)) * 60);
      auto p = temporal_decompose({s, s + len});
      REQUIRE(!p.periods.empty());
      if (p.constraint_respected)
        CHECK(p.periods.size() <= 5);
      for (std::size_t j = 0; j < p.periods.size(); ++j) {
        CHECK(p.periods[j].start_minute % p.periods[j].size_minutes == 0);
        if (j > 0)
          CHECK(p.periods[j - 1].end_seconds() <= p.periods[j].start_seconds());
      }
      // covered: the union is a superset of [s, s+len)
      std::int64_t covered_to = s;
      for (const auto& period : p.periods) {
        if (period.end_seconds() <= covered_to)
          continue;
        CHECK(period.start_seconds() <= covered_to);
        covered_to = period.end_seconds();
      }
      CHECK(covered_to >= s + len);
    }
  }
}
