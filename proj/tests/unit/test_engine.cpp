#include "doctest.h"

#include "ogb/perf/cluster.hpp"

#include <filesystem>
#include <fstream>
#include <unistd.h>
#include <random>

using namespace ogb;
using namespace ogb::engine;
using geo::GeoCoord;
using geo::Geometry;
using geo::TileId;
using icn::Name;

namespace {

const geo::TileId kRome = geo::tile_of({12.5, 41.5}, 0);

std::string
point_feature(const std::string& oid, GeoCoord c, const std::string& uid = "alice", const std::string& tid = "acme",
              const std::string& cid = "shops")
{
  return geo::make_feature_json(oid, tid, uid, cid, Geometry::point(c));
}

perf::ClusterConfig
one_engine(bool bf = false)
{
  perf::ClusterConfig c;
  c.engines = {{"e1", {kRome}}};
  c.bf_server = bf;
  c.bf_capacity = 10'000;
  return c;
}

std::vector<icn::Data>
signed_objects(const trust::Identity& user, const std::string& json)
{
  auto objects = make_objects(geo::parse_feature(json));
  for (auto& d : objects)
    user.signer().sign(d);
  return objects;
}

icn::Interest
tile_interest(const trust::Identity& user, const TileQuery& q)
{
  icn::Interest i;
  i.name = icn::segment_name(tile_query_name(q), 0);
  user.signer().sign(i);
  return i;
}

} // namespace

TEST_SUITE("engine.objects")
{
  TEST_CASE("payload and name codecs")
  {
    ObjectPayload p{ObjectKind::Reference, geo::TimeInterval{10, 20}, "ndn:/OGB/x"};
    auto back = decode_payload(encode_payload(p));
    CHECK(back.kind == p.kind);
    CHECK(back.valid_time == p.valid_time);
    CHECK(back.body == p.body);
    CHECK_THROWS_AS(decode_payload(Bytes{1, 0}), FormatError);

    DataName dn{geo::tile_of({12.51, 41.89}, 2), "acme", "shops", "alice", "o1"};
    auto n = data_name(dn);
    CHECK(n.to_uri() == "ndn:/OGB/12/41/58/19/GPS-ID/DATA/acme/shops/alice/o1");
    CHECK(parse_data_name(n) == dn);
    CHECK_THROWS_AS(parse_data_name(delete_name(dn)), FormatError);

    TileQuery q{geo::tile_of({12.51, 41.89}, 1), "acme", "shops", tess::Period{100, 3200}};
    auto qn = tile_query_name(q);
    CHECK(qn.to_uri() == "ndn:/OGB/12/41/58/GPS-ID/TILE/acme/shops/T/100/3200");
    std::optional<std::uint32_t> seg;
    CHECK(parse_tile_query(icn::segment_name(qn, 4), &seg) == q);
    CHECK(seg == 4u);
    CHECK_THROWS_AS(parse_tile_query(Name::parse("/OGB/12/41/GPS-ID/TILE/acme/shops/T/100/3250")), FormatError);
    CHECK(ip_res_name(kRome).to_uri() == "ndn:/OGB/12/41/GPS-ID/IP-RES");
  }

  TEST_CASE("tile content codec")
  {
    icn::Data a;
    a.name = Name::parse("/a");
    a.payload = to_bytes("x");
    icn::Data b;
    b.name = Name::parse("/b");
    auto back = decode_tile(encode_tile({icn::encode(a), icn::encode(b)}));
    REQUIRE(back.size() == 2);
    CHECK(back[0] == a);
    CHECK(back[1] == b);
    CHECK(decode_tile(encode_tile({})).empty());
  }

  TEST_CASE("level replication of a point: one item per level, master at level 2")
  {
    auto f = geo::parse_feature(point_feature("starbucks", {12.515, 41.895}));
    auto objects = make_objects(f);
    REQUIRE(objects.size() == 3);
    int masters = 0;
    for (const auto& d : objects) {
      auto p = decode_payload(d.payload);
      auto dn = parse_data_name(d.name);
      if (p.kind == ObjectKind::Master) {
        ++masters;
        CHECK(dn.tile.level == 2);
        CHECK(p.body == f.json);
      }
      else {
        CHECK(p.body == master_name(f).to_uri());
      }
    }
    CHECK(masters == 1);
  }

  TEST_CASE("multi-tile master sits at the smallest level-2 prefix")
  {
    auto g = Geometry::multipoint({{12.555, 41.555}, {12.505, 41.505}, {13.5, 41.5}});
    auto f = geo::parse_feature(geo::make_feature_json("m", "t", "u", "c", g));
    auto objects = make_objects(f);
    // level 2: 3 tiles, level 1: 2 tiles, level 0: 2 tiles
    CHECK(objects.size() == 7);
    std::string smallest = "~";
    for (const auto& t : geo::intersecting_tiles(g, 2))
      smallest = std::min(smallest, geo::tile_prefix(t).to_uri());
    CHECK(master_name(f).to_uri().rfind(smallest, 0) == 0);
  }
}

TEST_SUITE("engine.store")
{
  TEST_CASE("insert, tile-query, cache and void tile")
  {
    perf::Cluster cluster(one_engine());
    auto alice = cluster.make_user("acme", "shops", "alice");
    auto bob = cluster.make_user("acme", "shops", "bob");
    auto& e = cluster.engine(0);

    GeoCoord where{12.515, 41.895};
    auto statuses = e.insert(signed_objects(alice, point_feature("starbucks", where)));
    CHECK(statuses == std::vector<InsertStatus>(3, InsertStatus::Ok));
    statuses = e.insert(signed_objects(bob, point_feature("bar", {12.516, 41.896}, "bob")));
    CHECK(statuses == std::vector<InsertStatus>(3, InsertStatus::Ok));
    CHECK(e.object_count() == 6);
    CHECK(e.master_count() == 2);
    for (int level = 0; level < 3; ++level)
      CHECK(e.level_rows(level) == 2);

    // duplicate refused
    statuses = e.insert(signed_objects(alice, point_feature("starbucks", where)));
    CHECK(statuses == std::vector<InsertStatus>(3, InsertStatus::Duplicate));

    auto client = icn::AppFace::attach(cluster.router(), "client");
    auto validator = cluster.make_validator(client);
    TileQuery q{geo::tile_of(where, 2), "acme", "shops", std::nullopt};
    auto reply = client->express(tile_interest(bob, q));
    auto cert = validator->validate(reply);
    REQUIRE(cert);
    CHECK(cert->kl_name == trust::engine_cert_name("e1"));
    auto items = decode_tile(reply.payload);
    REQUIRE(items.size() == 2);
    std::set<std::string> uids;
    for (const auto& d : items)
      uids.insert(parse_data_name(d.name).uid);
    CHECK(uids == std::set<std::string>{"alice", "bob"});
    CHECK(reply.freshness == Millis{0});

    auto before = e.counters();
    auto again = client->express(tile_interest(bob, q));
    auto after = e.counters();
    CHECK(again.payload == reply.payload);
    CHECK(after.cache_hits == before.cache_hits + 1);
    CHECK(after.index_lookups == before.index_lookups);

    // write invalidates
    e.insert(signed_objects(alice, point_feature("third", {12.517, 41.897})));
    auto fresh = client->express(tile_interest(bob, q));
    CHECK(decode_tile(fresh.payload).size() == 3);
    CHECK(e.counters().index_lookups == after.index_lookups + 1);

    // void tile
    TileQuery empty{geo::tile_of({12.9, 41.1}, 2), "acme", "shops", std::nullopt};
    auto v = client->express(tile_interest(bob, empty));
    CHECK(validator->validate(v));
    CHECK(decode_tile(v.payload).empty());
    client->close();
  }

  TEST_CASE("insert rejections")
  {
    perf::Cluster cluster(one_engine());
    auto alice = cluster.make_user("acme", "shops", "alice");
    auto bob = cluster.make_user("acme", "shops", "bob");
    auto reader = cluster.make_user("acme", "shops", "carol", false);
    auto& e = cluster.engine(0);

    // named uid=alice, signed by bob
    auto forged = signed_objects(bob, point_feature("x", {12.5, 41.5}, "alice"));
    CHECK(e.insert(forged) == std::vector<InsertStatus>(3, InsertStatus::Denied));

    auto ro = signed_objects(reader, point_feature("y", {12.5, 41.5}, "carol"));
    CHECK(e.insert(ro) == std::vector<InsertStatus>(3, InsertStatus::Denied));

    auto tampered = signed_objects(alice, point_feature("z", {12.5, 41.5}));
    tampered[0].signature.value[5] ^= 1;
    CHECK(e.insert({tampered[0]}).front() == InsertStatus::BadSignature);

    auto elsewhere = signed_objects(alice, point_feature("w", {20.5, 41.5}));
    CHECK(e.insert(elsewhere) == std::vector<InsertStatus>(3, InsertStatus::NotOwner));

    icn::Data junk;
    junk.name = Name::parse("/OGB/12/41/GPS-ID/DATA/acme/shops/alice/j");
    junk.payload = to_bytes("nope");
    alice.signer().sign(junk);
    CHECK(e.insert({junk}).front() == InsertStatus::Malformed);

    auto unsigned_objects = make_objects(geo::parse_feature(point_feature("u", {12.5, 41.5})));
    CHECK(e.insert(unsigned_objects) == std::vector<InsertStatus>(3, InsertStatus::BadSignature));
    CHECK(e.object_count() == 0);
  }

  TEST_CASE("select_names is per tenant, collection and level")
  {
    perf::Cluster cluster(one_engine());
    auto foo = cluster.make_user("Foo", "Shop", "u1");
    auto bar = cluster.make_user("Bar", "Shop", "u1");
    auto& e = cluster.engine(0);
    CHECK(e.select_names(geo::tile_of({12.5, 41.5}, 2), "Foo", "Shop").empty());

    GeoCoord c{12.585, 41.195};
    e.insert(signed_objects(foo, point_feature("a", c, "u1", "Foo", "Shop")));
    e.insert(signed_objects(bar, point_feature("b", c, "u1", "Bar", "Shop")));
    auto names = e.select_names(geo::tile_of(c, 2), "Foo", "Shop");
    REQUIRE(names.size() == 1);
    CHECK(parse_data_name(names[0]).oid == "a");
    auto l1 = e.select_names(geo::tile_of(c, 1), "Foo", "Shop");
    REQUIRE(l1.size() == 1);
    CHECK(parse_data_name(l1[0]).tile.level == 1);
  }

  TEST_CASE("1000-object batch fills each level table")
  {
    perf::ClusterConfig config = one_engine();
    config.key_type = icn::SignatureType::HmacSha256;
    perf::Cluster cluster(config);
    auto alice = cluster.make_user("acme", "shops", "alice");
    auto& e = cluster.engine(0);

    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> lng(12.0, 13.0), lat(41.0, 42.0);
    std::vector<icn::Data> batch;
    std::array<std::size_t, 3> expected{};
    std::size_t features = 0;
    while (batch.size() < 1000) {
      std::vector<GeoCoord> pts{{lng(rng), lat(rng)}};
      if (features % 3 == 0)
        pts.push_back({lng(rng), lat(rng)});
      auto g = pts.size() == 1 ? Geometry::point(pts[0]) : Geometry::multipoint(pts);
      auto json = geo::make_feature_json("o" + std::to_string(features++), "acme", "alice", "shops", g);
      for (int level = 0; level < 3; ++level)
        expected[level] += geo::intersecting_tiles(g, level).size();
      auto objs = signed_objects(alice, json);
      batch.insert(batch.end(), objs.begin(), objs.end());
    }
    auto statuses = bulk_insert(e.endpoint(), batch);
    CHECK(std::count(statuses.begin(), statuses.end(), InsertStatus::Ok) == static_cast<long>(batch.size()));
    for (int level = 0; level < 3; ++level)
      CHECK(e.level_rows(level) == expected[level]);
    CHECK(e.master_count() == features);
    CHECK(e.object_count() == batch.size());
  }

  TEST_CASE("delete")
  {
    perf::Cluster cluster(one_engine());
    auto alice = cluster.make_user("acme", "shops", "alice");
    auto bob = cluster.make_user("acme", "shops", "bob");
    auto& e = cluster.engine(0);
    auto objects = signed_objects(alice, point_feature("o1", {12.5, 41.5}));
    e.insert(objects);

    auto dn = parse_data_name(objects[0].name);
    icn::Interest by_bob;
    by_bob.name = delete_name(dn);
    bob.signer().sign(by_bob);
    CHECK(e.remove(by_bob) == DeleteStatus::Denied);

    icn::Interest by_alice;
    by_alice.name = delete_name(dn);
    alice.signer().sign(by_alice);
    CHECK(e.remove(by_alice) == DeleteStatus::Ok);
    CHECK(e.remove(by_alice) == DeleteStatus::NotFound);
    CHECK(e.object_count() == 2);
    CHECK(e.select_names(dn.tile, "acme", "shops").empty());
  }

  TEST_CASE("IP-RES reaches the owning engine among four")
  {
    perf::ClusterConfig config;
    config.engines = perf::split_region({{10, 40}, {14, 44}}, 4);
    config.bf_server = false;
    perf::Cluster cluster(config);
    auto client = icn::AppFace::attach(cluster.router(), "client");
    auto validator = cluster.make_validator(client);
    for (const auto& c : std::vector<GeoCoord>{{10.5, 40.5}, {11.2, 43.9}, {12.99, 41.1}, {13.01, 42.7}}) {
      auto tile = geo::tile_of(c, 2);
      icn::Interest i;
      i.name = ip_res_name(tile);
      auto d = client->express(i);
      auto cert = validator->validate(d);
      REQUIRE(cert);
      auto* owner = cluster.owner(tile);
      REQUIRE(owner);
      CHECK(cert->kl_name == trust::engine_cert_name(owner->id()));
      CHECK(ogb::to_string(d.payload) == owner->endpoint());
      CHECK(d.freshness == owner->options().ip_res_freshness);
    }
    client->close();
  }

  TEST_CASE("counting filter follows the store and reaches the BF server")
  {
    perf::Cluster cluster(one_engine(true));
    auto alice = cluster.make_user("acme", "shops", "alice");
    auto& e = cluster.engine(0);
    auto objects = signed_objects(alice, point_feature("o1", {12.5, 41.5}));
    e.insert(objects);
    auto key = bloom::bloom_key(geo::tile_of({12.5, 41.5}, 1), "acme", "shops");
    CHECK(e.bloom_contains(key));
    REQUIRE(cluster.flush_bloom());
    CHECK(cluster.bloom_server()->membership({key}) == std::vector<bool>{true});

    icn::Interest del;
    del.name = delete_name(parse_data_name(objects[0].name));
    alice.signer().sign(del);
    CHECK(e.remove(del) == DeleteStatus::Ok);
    for (const auto& d : objects) {
      icn::Interest i;
      i.name = d.name.appended("DELETE");
      alice.signer().sign(i);
      e.remove(i);
    }
    CHECK_FALSE(e.bloom_contains(key));
    REQUIRE(cluster.flush_bloom());
    CHECK(cluster.bloom_server()->popcount() == 0);
  }

  TEST_CASE("snapshot replay and front-end provenance check")
  {
    auto path = std::filesystem::temp_directory_path() / ("ogb-snap-" + std::to_string(::getpid()));
    std::filesystem::remove(path);
    perf::Cluster cluster(one_engine());
    auto alice = cluster.make_user("acme", "shops", "alice");
    auto bob = cluster.make_user("acme", "shops", "bob");
    auto client = icn::AppFace::attach(cluster.router(), "client");

    {
      // a standalone engine on the cluster's first node, writing a snapshot
      auto& e0 = cluster.engine(0);
      e0.stop();
      EngineOptions eo = e0.options();
      eo.snapshot_path = path.string();
      auto identity = e0.identity();
      auto validator = cluster.make_validator(client);
      {
        Engine e(cluster.engine_node(0), identity, validator, eo);
        e.start();
        CHECK(e.insert(signed_objects(alice, point_feature("kept", {12.5, 41.5}))) ==
              std::vector<InsertStatus>(3, InsertStatus::Ok));
        for (const auto& d : signed_objects(alice, point_feature("gone", {12.6, 41.6}))) {
          e.insert({d});
          icn::Interest del;
          del.name = d.name.appended("DELETE");
          alice.signer().sign(del);
          CHECK(e.remove(del) == DeleteStatus::Ok);
        }
      }
      // append an item named for alice but signed by bob, bypassing validation
      auto forged = signed_objects(bob, point_feature("forged", {12.5, 41.5}, "alice"));
      {
        std::ofstream out(path, std::ios::binary | std::ios::app);
        for (const auto& d : forged) {
          Bytes record{1};
          auto w = icn::encode(d);
          record.insert(record.end(), w.begin(), w.end());
          auto f = icn::frame(record);
          out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size()));
        }
      }
      Engine restarted(cluster.engine_node(0), identity, validator, eo);
      restarted.start();
      CHECK(restarted.object_count() == 6);
      CHECK(restarted.object(data_name({geo::tile_of({12.5, 41.5}, 0), "acme", "shops", "alice", "kept"})));

      auto fe = cluster.frontend(bob);
      frontend::RangeQuery q;
      q.bbox = {{12.4, 41.4}, {12.7, 41.7}};
      q.tid = "acme";
      q.cid = "shops";
      auto r = fe->range_query(q);
      INFO(r.stats.tiles, " ", r.stats.items, " ", r.stats.validation_failures);
      REQUIRE(r.objects.size() == 1);
      CHECK(r.objects[0].oid == "kept");
      CHECK(r.stats.validation_failures > 0);
      restarted.stop();
    }
    client->close();
    std::filesystem::remove(path);
  }
}
