#include "doctest.h"

#include "ogb/bloom/service.hpp"
#include "ogb/icn/app_face.hpp"

#include <random>

using namespace ogb;
using namespace ogb::bloom;

TEST_SUITE("bloom")
{
  TEST_CASE("sizing and analytic false-positive rate")
  {
    auto p = params_for(100'000, 0.01);
    CHECK(p.h == 7);
    CHECK(p.m >= 958'000);
    CHECK(p.m <= 960'000);
    CHECK(analytic_fp(p, 100'000) == doctest::Approx(0.01).epsilon(0.05));
    CHECK(analytic_fp(p, 0) == 0.0);
    CHECK(analytic_fp({1024, 3}, 100) == doctest::Approx(std::pow(1 - std::exp(-300.0 / 1024), 3)));
  }

  TEST_CASE("empirical false positives track the analytic rate")
  {
    for (double target : {0.01, 0.05}) {
      auto p = params_for(100'000, target);
      BloomFilter f(p);
      for (int i = 0; i < 100'000; ++i)
        f.insert("in/" + std::to_string(i));
      for (int i = 0; i < 100'000; i += 97)
        REQUIRE(f.contains("in/" + std::to_string(i)));
      int fp = 0;
      const int probes = 200'000;
      for (int i = 0; i < probes; ++i)
        fp += f.contains("out/" + std::to_string(i));
      double rate = static_cast<double>(fp) / probes;
      CAPTURE(target);
      CHECK(rate == doctest::Approx(analytic_fp(p, 100'000)).epsilon(0.15));
    }
  }

  TEST_CASE("bucket hashing is deterministic and in range")
  {
    BloomParams p{1000, 5};
    auto a = buckets(p, "x");
    CHECK(a == buckets(p, "x"));
    CHECK(a.size() == 5);
    for (auto b : a)
      CHECK(b < 1000);
    CHECK(a != buckets(p, "y"));
    auto t = geo::tile_of({12.51, 41.89}, 2);
    CHECK(bloom_key(t, "acme", "shops") == geo::tile_prefix(t).to_uri() + "|acme|shops");
  }

  TEST_CASE("counting filter transitions")
  {
    CountingBloomFilter c({4096, 4});
    auto up = c.insert("k");
    CHECK(up.size() == buckets({4096, 4}, "k").size());
    for (const auto& t : up)
      CHECK(t.up);
    CHECK(c.insert("k").empty());
    CHECK(c.contains("k"));
    CHECK(c.remove("k").empty());
    auto down = c.remove("k");
    CHECK(down.size() == up.size());
    for (const auto& t : down)
      CHECK_FALSE(t.up);
    CHECK_FALSE(c.contains("k"));
    CHECK(c.remove("k").empty());

    // saturated counters stay set
    CountingBloomFilter s({64, 1});
    for (int i = 0; i < 20; ++i)
      s.insert("same");
    auto b = buckets({64, 1}, "same")[0];
    CHECK(s.count(b) == CountingBloomFilter::kMaxCount);
    for (int i = 0; i < 20; ++i)
      CHECK(s.remove("same").empty());
    CHECK(s.contains("same"));
  }

  TEST_CASE("codecs round-trip")
  {
    UpdateMessage m{42, {{1, true}, {70000, false}}};
    auto back = decode_update(encode(m));
    CHECK(back.seq == 42);
    CHECK(back.transitions == m.transitions);
    auto wire = encode(m);
    wire.pop_back();
    CHECK_THROWS(decode_update(wire));

    std::vector<std::string> keys{"a", "", "/OGB/12/41|t|c"};
    CHECK(decode_keys(encode_keys(keys)) == keys);
    CHECK_THROWS(encode_keys(std::vector<std::string>(kMaxBatch + 1, "k")));

    std::vector<bool> bits{true, false, false, true, true, false, true, false, true};
    CHECK(decode_bits(encode_bits(bits), bits.size()) == bits);
  }

  TEST_CASE("server bits are the OR of engine filters")
  {
    BloomParams p{2048, 3};
    BloomServer server(nullptr, p, nullptr, {"e0", "e1"});
    CountingBloomFilter e0(p), e1(p);
    std::uint64_t s0 = 0, s1 = 0;

    server.apply("e0", {++s0, e0.insert("shared")});
    server.apply("e1", {++s1, e1.insert("shared")});
    CHECK(server.membership({"shared"}) == std::vector<bool>{true});
    server.apply("e0", {++s0, e0.remove("shared")});
    CHECK(server.membership({"shared"}) == std::vector<bool>{true});
    server.apply("e1", {++s1, e1.remove("shared")});
    CHECK(server.membership({"shared"}) == std::vector<bool>{false});
    CHECK(server.popcount() == 0);
    CHECK_FALSE(server.apply("e9", {1, {{1, true}}}));
    CHECK(server.counters().updates_rejected == 1);
  }

  TEST_CASE("scripted interleavings keep the server consistent")
  {
    BloomParams p{512, 3};
    for (std::uint64_t seed : {1u, 2u, 3u, 4u}) {
      std::mt19937_64 rng(seed);
      BloomServer server(nullptr, p, nullptr, {"e0", "e1", "e2"});
      std::vector<CountingBloomFilter> cbf(3, CountingBloomFilter(p));
      std::vector<std::map<std::string, int>> live(3);
      std::vector<std::uint64_t> seq(3, 0);
      std::vector<std::vector<UpdateMessage>> pending(3);
      std::uniform_int_distribution<int> engine(0, 2), key(0, 40), action(0, 9);

      for (int step = 0; step < 3000; ++step) {
        int e = engine(rng);
        int a = action(rng);
        if (a < 4) {
          auto k = "k" + std::to_string(key(rng));
          ++live[e][k];
          pending[e].push_back({++seq[e], cbf[e].insert(k)});
        }
        else if (a < 7 && !live[e].empty()) {
          auto it = live[e].begin();
          std::advance(it, std::uniform_int_distribution<std::size_t>(0, live[e].size() - 1)(rng));
          auto k = it->first;
          if (--it->second == 0)
            live[e].erase(it);
          pending[e].push_back({++seq[e], cbf[e].remove(k)});
        }
        else if (!pending[e].empty()) {
          // deliver in order, sometimes twice
          auto m = pending[e].front();
          pending[e].erase(pending[e].begin());
          server.apply("e" + std::to_string(e), m);
          if (a == 9)
            server.apply("e" + std::to_string(e), m);
        }
      }
      for (int e = 0; e < 3; ++e)
        for (auto& m : pending[e])
          server.apply("e" + std::to_string(e), m);

      for (std::uint32_t b = 0; b < p.m; ++b) {
        bool any = cbf[0].count(b) || cbf[1].count(b) || cbf[2].count(b);
        REQUIRE(server.bit(b) == any);
      }
      for (int e = 0; e < 3; ++e)
        for (const auto& [k, n] : live[e])
          CHECK(server.membership({k}) == std::vector<bool>{true});
    }
  }

  TEST_CASE("membership over the network")
  {
    auto clock = std::make_shared<ManualClock>();
    icn::Forwarder fwd("r", clock);
    auto sface = icn::AppFace::attach(fwd, "bf");
    auto cface = icn::AppFace::attach(fwd, "client");
    BloomParams p{4096, 4};
    BloomServer server(sface, p, nullptr, {"e0"});
    CountingBloomFilter e0(p);
    server.apply("e0", {1, e0.insert("present")});
    BloomClient client(cface, Millis{500}, 0);
    auto r = client.membership({"present", "absent", "present"});
    REQUIRE(r);
    CHECK(*r == std::vector<bool>{true, false, true});
    CHECK(server.counters().membership_items == 3);
  }
}
