#include "doctest.h"

#include "ogb/geo/feature.hpp"

#include <random>
#include <set>

using namespace ogb;
using namespace ogb::geo;

namespace {

bool
box_contains(const BBox& b, const GeoCoord& c)
{
  return b.min.lng <= c.lng && c.lng < b.max.lng && b.min.lat <= c.lat && c.lat < b.max.lat;
}

TileId
random_tile(std::mt19937& rng)
{
  int level = static_cast<int>(rng() % 3);
  auto s = scale(level);
  std::uniform_int_distribution<std::int64_t> dx(-180 * s, 180 * s - 1), dy(-90 * s, 90 * s - 1);
  return {level, dx(rng), dy(rng)};
}

} // namespace

TEST_SUITE("geo.grid")
{
  TEST_CASE("tile_of examples")
  {
    CHECK(tile_of({12.51133, 41.8919}, 2) == tile_at({12.51, 41.89}, 2));
    CHECK(tile_of({12.0, 41.0}, 0) == tile_at({12, 41}, 0));
    auto t = tile_of({-0.37, 51.52}, 1);
    CHECK(t == tile_at({-0.4, 51.5}, 1));
    CHECK(box_contains(tile_bbox(t), {-0.37, 51.52}));
    CHECK_THROWS_AS(tile_of({180, 0}, 0), GeoError);
    CHECK_THROWS_AS(tile_of({0, 90}, 0), GeoError);
  }

  TEST_CASE("tile_prefix examples")
  {
    CHECK(tile_prefix(tile_at({12.51, 41.89}, 2)).to_uri() == "ndn:/OGB/12/41/58/19/GPS-ID");
    CHECK(tile_prefix(tile_at({12, 41}, 0)).to_uri() == "ndn:/OGB/12/41/GPS-ID");
    auto neg = tile_at({-0.4, 51.5}, 1);
    CHECK(tile_prefix(neg).to_uri() == "ndn:/OGB/-1/51/65/GPS-ID");
    CHECK(parse_tile_prefix(tile_prefix(neg)) == neg);
  }

  TEST_CASE("parse_tile_prefix examples and errors")
  {
    CHECK(parse_tile_prefix(icn::Name::parse("ndn:/OGB/12/41/58/19/GPS-ID")) == tile_at({12.51, 41.89}, 2));
    CHECK(parse_tile_prefix(icn::Name::parse("ndn:/OGB/12/41/GPS-ID")) == tile_at({12, 41}, 0));
    CHECK_THROWS_AS(parse_tile_prefix(icn::Name::parse("ndn:/OGB/12/41/5/GPS-ID")), GeoError);
    CHECK_THROWS_AS(parse_tile_prefix(icn::Name::parse("ndn:/OGB/12/41/58")), GeoError);
    CHECK_THROWS_AS(parse_tile_prefix(icn::Name::parse("ndn:/OGB/12/41/5a/GPS-ID")), GeoError);
    CHECK_THROWS_AS(parse_tile_prefix(icn::Name::parse("ndn:/OGB/x/41/GPS-ID")), GeoError);
    auto with_suffix = icn::Name::parse("ndn:/OGB/12/41/58/19/GPS-ID/TILE/Foo/Shop");
    CHECK_THROWS_AS(parse_tile_prefix(with_suffix), GeoError);
    CHECK(parse_tile_prefix(with_suffix, true) == tile_at({12.51, 41.89}, 2));
  }

  TEST_CASE("tile_bbox examples")
  {
    auto b0 = tile_bbox(tile_at({12, 41}, 0));
    CHECK(b0.min == GeoCoord{12, 41});
    CHECK(b0.max == GeoCoord{13, 42});
    auto b2 = tile_bbox(tile_at({12.51, 41.89}, 2));
    CHECK(b2.min.lng == doctest::Approx(12.51));
    CHECK(b2.max.lng == doctest::Approx(12.52));
    CHECK(b2.max.lat == doctest::Approx(41.90));
    auto b1 = tile_bbox(tile_at({-0.4, 51.5}, 1));
    CHECK(b1.min.lng == doctest::Approx(-0.4));
    CHECK(b1.max.lng == doctest::Approx(-0.3));
    CHECK(b1.max.lat == doctest::Approx(51.6));
  }

  TEST_CASE("parent and children examples")
  {
    auto t2 = tile_at({12.51, 41.89}, 2);
    CHECK(parent(t2) == tile_at({12.5, 41.8}, 1));
    CHECK(parent(parent(t2)) == tile_at({12, 41}, 0));
    auto kids = children(tile_at({12, 41}, 0));
    CHECK(kids.size() == 100);
    std::set<TileId> uniq(kids.begin(), kids.end());
    CHECK(uniq.size() == 100);
    CHECK(uniq.contains(tile_at({12.0, 41.0}, 1)));
    CHECK(uniq.contains(tile_at({12.9, 41.9}, 1)));
    CHECK_THROWS_AS(children(t2), GeoError);
    CHECK_THROWS_AS(parent(tile_at({12, 41}, 0)), GeoError);
  }

  TEST_CASE("intersecting_tiles examples")
  {
    CHECK(intersecting_tiles(Geometry::point({12.51133, 41.8919}), 2) ==
          std::vector<TileId>{tile_at({12.51, 41.89}, 2)});
    CHECK(intersecting_tiles(Geometry::multipoint({{12.511, 41.891}, {12.519, 41.899}}), 2) ==
          std::vector<TileId>{tile_at({12.51, 41.89}, 2)});
    auto two = intersecting_tiles(Geometry::multipoint({{12.511, 41.891}, {13.2, 41.1}}), 0);
    CHECK(two == std::vector<TileId>{tile_at({12, 41}, 0), tile_at({13, 41}, 0)});
    auto env = intersecting_tiles(Geometry::other({{12.05, 41.05}, {12.25, 41.1}}), 1);
    CHECK(env.size() == 3 * 2);
  }

  TEST_CASE("property: prefix round-trip")
  {
    std::mt19937 rng(1);
    for (int i = 0; i < 20000; ++i) {
      auto t = random_tile(rng);
      auto n = tile_prefix(t);
      CHECK(parse_tile_prefix(n) == t);
      CHECK(tile_prefix(parse_tile_prefix(n)) == n);
    }
  }

  TEST_CASE("property: containment")
  {
    std::mt19937 rng(2);
    std::uniform_real_distribution<double> lng(-180, 180), lat(-90, 90);
    for (int i = 0; i < 20000; ++i) {
      GeoCoord c{lng(rng), lat(rng)};
      for (int level = 0; level < 3; ++level)
        CHECK(box_contains(tile_bbox(tile_of(c, level)), c));
    }
  }

  TEST_CASE("property: hierarchy of names")
  {
    std::mt19937 rng(3);
    for (int i = 0; i < 10000; ++i) {
      auto t = random_tile(rng);
      if (t.level == 0)
        continue;
      auto p = parent(t);
      CHECK(routing_prefix(p).is_prefix_of(tile_prefix(t)));
      CHECK(routing_prefix(p).size() < routing_prefix(t).size());
      CHECK(routing_prefix(t).is_prefix_of(tile_prefix(t)));
      CHECK(tile_of(tile_bbox(t).min, p.level) == p);
    }
  }

  TEST_CASE("property: children partition the parent")
  {
    std::mt19937 rng(4);
    std::uniform_real_distribution<double> u(0, 1);
    for (int i = 0; i < 200; ++i) {
      auto t = random_tile(rng);
      if (t.level == 2)
        t = parent(t);
      auto kids = children(t);
      auto box = tile_bbox(t);
      double area = 0;
      for (const auto& k : kids) {
        CHECK(parent(k) == t);
        area += tile_bbox(k).area_deg2();
      }
      CHECK(area == doctest::Approx(box.area_deg2()));
      // each sample point of the parent lies in exactly one child
      for (int s = 0; s < 20; ++s) {
        GeoCoord c{box.min.lng + u(rng) * box.width(), box.min.lat + u(rng) * box.height()};
        if (!box_contains(box, c))
          continue;
        int hits = 0;
        for (const auto& k : kids)
          hits += box_contains(tile_bbox(k), c) ? 1 : 0;
        CHECK(hits == 1);
      }
    }
  }

  TEST_CASE("tiles_in_box is half-open")
  {
    auto tiles = tiles_in_box({{12, 41}, {12.5, 41.5}}, 2);
    CHECK(tiles.size() == 2500);
    CHECK(tiles_in_box({{12, 41}, {13, 42}}, 0).size() == 1);
    CHECK(tiles_in_box({{12.05, 41.05}, {12.15, 41.15}}, 1).size() == 4);
  }

  TEST_CASE("predicates")
  {
    BBox q{{12, 41}, {13, 42}};
    CHECK(intersects(Geometry::point({12, 41}), q));
    CHECK_FALSE(intersects(Geometry::point({13, 41.5}), q));
    auto mp = Geometry::multipoint({{12.5, 41.5}, {13.5, 41.5}});
    CHECK(intersects(mp, q));
    CHECK_FALSE(within(mp, q));
    CHECK(within(Geometry::multipoint({{12.5, 41.5}, {12.9, 41.9}}), q));
    auto poly = Geometry::other({{11.5, 41.2}, {12.0, 41.3}});
    CHECK(intersects(poly, q));
    CHECK_FALSE(within(poly, q));
    CHECK(overlaps({10, 10}, {10, 11}));
    CHECK_FALSE(overlaps({10, 10}, {11, 20}));
    CHECK_FALSE(overlaps({20, 30}, {10, 20}));
  }
}

TEST_SUITE("geo.feature")
{
  TEST_CASE("parse the documented Feature")
  {
    auto f = parse_feature(R"({"type": "Feature",
      "geometry": {"type": "Point","coordinates": [12.51133, 41.8919]},
      "properties": {"oid" : 1234, "tid" : "Foo", "uid": "Alice", "cid": "ShopApp",
                     "shop-name": "Starbucks", "shop-type" : "coffeehouse"}})");
    CHECK(f.oid == "1234");
    CHECK(f.tid == "Foo");
    CHECK(f.uid == "Alice");
    CHECK(f.cid == "ShopApp");
    CHECK(f.geometry.kind == GeometryKind::Point);
    CHECK_FALSE(f.valid_time);
  }

  TEST_CASE("temporal extent and other geometries")
  {
    auto f = parse_feature(R"({"type":"Feature",
      "geometry":{"type":"LineString","coordinates":[[1,2],[3,4.5]]},
      "properties":{"oid":"a","tid":"T","uid":"u","cid":"c"},
      "temporalExtent":{"validTime":{"type":"interval","value":[24807931,24807931]}}})");
    CHECK(f.geometry.kind == GeometryKind::Other);
    CHECK(f.geometry.bbox.max == GeoCoord{3, 4.5});
    REQUIRE(f.valid_time);
    CHECK(f.valid_time->start == 24807931);
  }

  TEST_CASE("mandatory properties")
  {
    CHECK_THROWS_AS(parse_feature(R"({"type":"Feature","geometry":{"type":"Point","coordinates":[1,2]},
      "properties":{"oid":"a","tid":"T","uid":"u"}})"),
                    GeoError);
    CHECK_THROWS_AS(parse_feature("{not json"), GeoError);
    CHECK_THROWS_AS(parse_feature(R"({"type":"Feature","geometry":{"type":"Point","coordinates":[200,2]},
      "properties":{"oid":"a","tid":"T","uid":"u","cid":"c"}})"),
                    GeoError);
  }

  TEST_CASE("make_feature_json round-trips")
  {
    auto g = Geometry::multipoint({{1, 2}, {3, 4}});
    auto f = parse_feature(make_feature_json("o", "t", "u", "c", g, TimeInterval{5, 9}, R"({"URL":"x"})"));
    CHECK(f.geometry.points == g.points);
    CHECK(f.valid_time == TimeInterval{5, 9});
  }
}
