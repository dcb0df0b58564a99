#include "doctest.h"

#include "ogb/icn/app_face.hpp"
#include "ogb/icn/segment.hpp"
#include "ogb/icn/tcp.hpp"

#include <random>
#include <sstream>
#include <sys/socket.h>

using namespace ogb;
using namespace ogb::icn;

namespace {

struct Recorder
{
  std::mutex mutex;
  std::vector<Packet> packets;

  std::shared_ptr<CallbackFace>
  face(const std::string& desc)
  {
    return std::make_shared<CallbackFace>(desc, [this](Packet p) {
      std::lock_guard lock(mutex);
      packets.push_back(std::move(p));
    });
  }

  std::size_t
  interests()
  {
    std::lock_guard lock(mutex);
    return std::count_if(packets.begin(), packets.end(),
                         [](auto& p) { return std::holds_alternative<Interest>(p); });
  }

  std::size_t
  data()
  {
    std::lock_guard lock(mutex);
    return std::count_if(packets.begin(), packets.end(),
                         [](auto& p) { return std::holds_alternative<Data>(p); });
  }
};

Interest
make_interest(const std::string& uri, std::uint32_t nonce)
{
  Interest i;
  i.name = Name::parse(uri);
  i.nonce = nonce;
  return i;
}

Data
make_data(const std::string& uri, Millis freshness, const std::string& body = "x")
{
  Data d;
  d.name = Name::parse(uri);
  d.payload = to_bytes(body);
  d.freshness = freshness;
  return d;
}

Bytes
random_bytes(std::size_t n, std::uint32_t seed)
{
  std::mt19937 rng(seed);
  Bytes b(n);
  for (auto& x : b)
    x = static_cast<std::uint8_t>(rng());
  return b;
}

} // namespace

TEST_SUITE("icn.name")
{
  TEST_CASE("parse and render")
  {
    auto n = Name::parse("ndn:/OGB/12/41/58/19/GPS-ID");
    CHECK(n.size() == 6);
    CHECK(n.to_uri() == "ndn:/OGB/12/41/58/19/GPS-ID");
    CHECK(Name::parse("/a/b/") == Name::parse("ndn:/a/b"));
  }

  TEST_CASE("prefix test is component-wise")
  {
    CHECK(Name::parse("/OGB/12").is_prefix_of(Name::parse("/OGB/12/41")));
    CHECK_FALSE(Name::parse("/OGB/1").is_prefix_of(Name::parse("/OGB/12/41")));
  }

  TEST_CASE("escaping round-trips")
  {
    Name n;
    n.append("a b/c%");
    auto uri = n.to_uri();
    CHECK(uri.find(' ') == std::string::npos);
    CHECK(Name::parse(uri) == n);
  }
}

TEST_SUITE("icn.packet")
{
  TEST_CASE("interest and data wire round-trip")
  {
    auto i = make_interest("/a/b", 42);
    i.parameters = to_bytes("params");
    i.signature = SignatureInfo{SignatureType::Ed25519, Name::parse("/CERT/x"), to_bytes("sig")};
    auto wire = encode(i);
    CHECK(wire[0] == 0x01);
    CHECK(wire.size() == wire_size(i));
    CHECK(decode_interest(wire) == i);

    auto d = make_data("/a/b/seg=0", Millis{100}, "payload");
    d.segment = 0;
    d.final_segment = 3;
    d.signature = SignatureInfo{SignatureType::HmacSha256, Name::parse("/k"), to_bytes("mac")};
    auto dw = encode(d);
    CHECK(dw[0] == 0x02);
    CHECK(dw.size() == wire_size(d));
    CHECK(std::get<Data>(decode(dw)) == d);
  }

  TEST_CASE("truncated wire is rejected")
  {
    auto wire = encode(make_data("/a", Millis{0}));
    wire.pop_back();
    CHECK_THROWS_AS(decode(wire), DecodeError);
  }
}

TEST_SUITE("icn.forwarder")
{
  TEST_CASE("longest prefix match")
  {
    Fib fib;
    fib.insert(Name::parse("/OGB/12/41"), 1);
    fib.insert(Name::parse("/OGB/12"), 2);
    CHECK(fib.longest_prefix_match(Name::parse("/OGB/12/41/58/19/GPS-ID/TILE/Foo/Shop")) ==
          std::vector<FaceId>{1});
    CHECK(fib.longest_prefix_match(Name::parse("/OGB/13/41/58")).empty());

    Fib fig;
    fig.insert(Name::parse("/d"), 1);
    fig.insert(Name::parse("/a"), 2);
    CHECK(fig.longest_prefix_match(Name::parse("/d/ptr71z")) == std::vector<FaceId>{1});
  }

  TEST_CASE("duplicate registration is idempotent and removal drops")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("n", clock);
    Recorder up, down;
    auto u = fw.add_face(up.face("up"));
    auto dface = down.face("down");
    fw.add_face(dface);
    fw.add_route(Name::parse("/OGB/12/41"), u);
    fw.add_route(Name::parse("/OGB/12/41"), u);
    CHECK(fw.lookup(Name::parse("/OGB/12/41/x")) == std::vector<FaceId>{u});

    dface->deliver(make_interest("/OGB/12/41/x", 1));
    CHECK(up.interests() == 1);
    fw.remove_route(Name::parse("/OGB/12/41"), u);
    dface->deliver(make_interest("/OGB/12/41/y", 2));
    CHECK(up.interests() == 1);
    CHECK(fw.counters().no_route == 1);
  }

  TEST_CASE("multicast suppression and fan-out")
  {
    for (int n : {2, 5, 8}) {
      auto clock = std::make_shared<ManualClock>();
      Forwarder fw("n", clock);
      Recorder up;
      auto upface = up.face("up");
      fw.add_route(Name::parse("/OGB"), fw.add_face(upface));
      std::vector<Recorder> downs(n);
      std::vector<std::shared_ptr<CallbackFace>> faces;
      for (int i = 0; i < n; ++i) {
        faces.push_back(downs[i].face("d" + std::to_string(i)));
        fw.add_face(faces.back());
      }
      for (int i = 0; i < n; ++i)
        faces[i]->deliver(make_interest("/OGB/x/TILE/t/c", 100 + i));
      CHECK(up.interests() == 1);
      CHECK(fw.counters().aggregated == static_cast<std::uint64_t>(n - 1));

      upface->deliver(make_data("/OGB/x/TILE/t/c", Millis{0}));
      for (auto& d : downs)
        CHECK(d.data() == 1);
      CHECK(fw.pit_size() == 0);
    }
  }

  TEST_CASE("cache hit replies without PIT entry")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("n", clock);
    Recorder up, down;
    auto upface = up.face("up");
    fw.add_route(Name::parse("/a"), fw.add_face(upface));
    auto dface = down.face("d");
    fw.add_face(dface);

    dface->deliver(make_interest("/a/1", 1));
    upface->deliver(make_data("/a/1", Millis{1000}));
    dface->deliver(make_interest("/a/1", 2));
    CHECK(up.interests() == 1);
    CHECK(down.data() == 2);
    CHECK(fw.pit_size() == 0);
    CHECK(fw.counters().cs_hits == 1);
  }

  TEST_CASE("freshness zero is never served from cache")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("n", clock);
    Recorder up, down;
    auto upface = up.face("up");
    fw.add_route(Name::parse("/a"), fw.add_face(upface));
    auto dface = down.face("d");
    fw.add_face(dface);

    dface->deliver(make_interest("/a/q", 1));
    upface->deliver(make_data("/a/q", Millis{0}));
    CHECK(down.data() == 1);
    dface->deliver(make_interest("/a/q", 2));
    CHECK(up.interests() == 2);
  }

  TEST_CASE("CS freshness property under simulated clock")
  {
    std::mt19937 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
      auto clock = std::make_shared<ManualClock>();
      Forwarder fw("n", clock);
      Recorder up, down;
      auto upface = up.face("up");
      fw.add_route(Name::parse("/a"), fw.add_face(upface));
      auto dface = down.face("d");
      fw.add_face(dface);

      auto freshness = Millis{1 + rng() % 1000};
      dface->deliver(make_interest("/a/f", 1));
      upface->deliver(make_data("/a/f", freshness));
      auto age = Millis{rng() % 2000};
      clock->advance(age);
      dface->deliver(make_interest("/a/f", 2));
      bool served_from_cache = fw.counters().cs_hits == 1;
      CHECK(served_from_cache == (age < freshness));
    }
  }

  TEST_CASE("unsolicited data is dropped and counted")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("n", clock);
    Recorder up;
    auto upface = up.face("up");
    fw.add_face(upface);
    upface->deliver(make_data("/nobody/asked", Millis{1000}));
    CHECK(fw.counters().unsolicited == 1);
    CHECK(fw.cache_size() == 0);
  }

  TEST_CASE("interest after PIT expiry is forwarded anew")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("n", clock);
    Recorder up, d1, d2;
    fw.add_route(Name::parse("/a"), fw.add_face(up.face("up")));
    auto f1 = d1.face("d1");
    auto f2 = d2.face("d2");
    fw.add_face(f1);
    fw.add_face(f2);

    f1->deliver(make_interest("/a/t", 1));
    clock->advance(Millis{4001});
    f2->deliver(make_interest("/a/t", 2));
    CHECK(up.interests() == 2);
  }

  TEST_CASE("duplicate nonce is never forwarded twice")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("n", clock);
    Recorder up, d1, d2;
    auto upface = up.face("up");
    fw.add_route(Name::parse("/a"), fw.add_face(upface));
    auto f1 = d1.face("d1");
    auto f2 = d2.face("d2");
    fw.add_face(f1);
    fw.add_face(f2);

    f1->deliver(make_interest("/a/loop", 9));
    f2->deliver(make_interest("/a/loop", 9));
    f1->deliver(make_interest("/a/loop", 9));
    CHECK(up.interests() == 1);
    CHECK(fw.counters().duplicate_nonce == 2);

    // satisfied Interest looping back later with the same nonce
    upface->deliver(make_data("/a/loop", Millis{0}));
    f2->deliver(make_interest("/a/loop", 9));
    CHECK(up.interests() == 1);
  }

  TEST_CASE("retransmission from the same face is forwarded again")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("n", clock);
    Recorder up, d1;
    fw.add_route(Name::parse("/a"), fw.add_face(up.face("up")));
    auto f1 = d1.face("d1");
    fw.add_face(f1);
    f1->deliver(make_interest("/a/r", 1));
    f1->deliver(make_interest("/a/r", 2));
    CHECK(up.interests() == 2);
  }

  TEST_CASE("sibling prefixes route disjointly")
  {
    auto clock = std::make_shared<ManualClock>();
    Forwarder fw("router", clock);
    Recorder e1, e2, c;
    fw.add_route(Name::parse("/OGB/12/41"), fw.add_face(e1.face("e1")));
    fw.add_route(Name::parse("/OGB/12/42"), fw.add_face(e2.face("e2")));
    auto cf = c.face("c");
    fw.add_face(cf);
    cf->deliver(make_interest("/OGB/12/41/58/19/GPS-ID", 1));
    cf->deliver(make_interest("/OGB/12/42/01/10/GPS-ID", 2));
    CHECK(e1.interests() == 1);
    CHECK(e2.interests() == 1);
  }

  TEST_CASE("LRU eviction")
  {
    ContentStore cs(2);
    auto t = std::chrono::steady_clock::now();
    cs.insert(make_data("/1", Millis{1000}), t);
    cs.insert(make_data("/2", Millis{1000}), t);
    CHECK(cs.find(Name::parse("/1"), t));
    cs.insert(make_data("/3", Millis{1000}), t);
    CHECK(cs.find(Name::parse("/1"), t));
    CHECK_FALSE(cs.find(Name::parse("/2"), t));
    CHECK(cs.find(Name::parse("/3"), t));
  }
}

namespace {

struct Fabric
{
  std::shared_ptr<Clock> clock = system_clock();
  Forwarder router{"router", clock};
  Forwarder producer_node{"producer", clock};
  std::shared_ptr<AppFace> consumer;
  std::shared_ptr<AppFace> producer;

  explicit Fabric(ChannelOptions link = {})
  {
    auto [a, b] = make_link("router-producer", link, link);
    auto fa = router.add_face(a);
    producer_node.add_face(b);
    router.add_route(Name::parse("/p"), fa);
    consumer = AppFace::attach(router, "consumer");
    producer = AppFace::attach(producer_node, "producer");
  }

  ~Fabric()
  {
    consumer->close();
    producer->close();
  }

  void
  serve(const Name& base, const Bytes& content, std::function<bool(const Interest&)> drop = {})
  {
    auto segments = std::make_shared<std::vector<Data>>(segment(base, content, kDefaultMaxPayload));
    auto weak = std::weak_ptr<AppFace>(producer);
    producer->set_interest_filter(base, [segments, weak, drop](const Interest& i) {
      if (drop && drop(i))
        return;
      auto idx = parse_segment(i.name.back());
      if (!idx || *idx >= segments->size())
        return;
      if (auto p = weak.lock())
        p->put((*segments)[*idx]);
    });
  }
};

} // namespace

TEST_SUITE("icn.segment")
{
  TEST_CASE("segment counts")
  {
    CHECK(segment(Name::parse("/x"), Bytes{}, 8192).size() == 1);
    CHECK(segment(Name::parse("/x"), Bytes{}, 8192)[0].final_segment == 0u);
    CHECK(segment(Name::parse("/x"), Bytes(8192), 8192).size() == 1);
    CHECK(segment(Name::parse("/x"), Bytes(130 * 1024), 8192).size() == 17);
    CHECK_THROWS(segment(Name::parse("/x"), Bytes(1), 0));
  }

  TEST_CASE("segment/reassemble round-trip")
  {
    for (std::uint32_t seed = 0; seed < 20; ++seed) {
      std::mt19937 rng(seed);
      auto payload = random_bytes(rng() % 100'000, seed);
      auto max = 1 + rng() % 9000;
      auto segs = segment(Name::parse("/x"), payload, max);
      CHECK(segs.size() == std::max<std::size_t>(1, (payload.size() + max - 1) / max));
      CHECK(reassemble(segs) == payload);
    }
  }

  TEST_CASE("get: one-segment and multi-segment content")
  {
    Fabric f;
    auto small = to_bytes("hello");
    f.serve(Name::parse("/p/small"), small);
    CHECK(get(*f.consumer, Name::parse("/p/small")) == small);

    auto big = random_bytes(130 * 1024, 3);
    f.serve(Name::parse("/p/big"), big);
    CHECK(get(*f.consumer, Name::parse("/p/big")) == big);
  }

  TEST_CASE("get: absent producer times out after retries")
  {
    Fabric f;
    GetOptions opt;
    opt.fetch.lifetime = Millis{30};
    opt.fetch.retries = 2;
    auto start = std::chrono::steady_clock::now();
    CHECK_THROWS_AS(get(*f.consumer, Name::parse("/p/missing"), opt), FetchError);
    CHECK(std::chrono::steady_clock::now() - start >= Millis{90});
  }

  TEST_CASE("get: recovers from a dropped segment")
  {
    Fabric f;
    auto content = random_bytes(50'000, 11);
    auto dropped = std::make_shared<std::atomic<bool>>(false);
    f.serve(Name::parse("/p/lossy"), content, [dropped](const Interest& i) {
      return i.name.back() == "seg=3" && !dropped->exchange(true);
    });
    GetOptions opt;
    opt.fetch.lifetime = Millis{50};
    CHECK(get(*f.consumer, Name::parse("/p/lossy"), opt) == content);
    CHECK(dropped->load());
  }

  TEST_CASE("get: validation failure")
  {
    Fabric f;
    f.serve(Name::parse("/p/v"), to_bytes("abc"));
    GetOptions opt;
    opt.validate = [](const Data&) { return false; };
    CHECK_THROWS_AS(get(*f.consumer, Name::parse("/p/v"), opt), FetchError);
  }

  TEST_CASE("get over a shaped link")
  {
    ChannelOptions link;
    link.bandwidth_bps = 200e6;
    Fabric f(link);
    auto content = random_bytes(200'000, 5);
    f.serve(Name::parse("/p/shaped"), content);
    CHECK(get(*f.consumer, Name::parse("/p/shaped")) == content);
  }
}

TEST_SUITE("icn.tcp")
{
  TEST_CASE("frame decoder handles split and coalesced input")
  {
    Bytes stream;
    std::vector<Bytes> frames{to_bytes("a"), Bytes{}, random_bytes(70'000, 1)};
    for (auto& fr : frames) {
      auto w = frame(fr);
      stream.insert(stream.end(), w.begin(), w.end());
    }
    for (std::size_t chunk : {1, 3, 1000, 1'000'000}) {
      FrameDecoder dec;
      std::vector<Bytes> out;
      for (std::size_t i = 0; i < stream.size(); i += chunk) {
        auto n = std::min(chunk, stream.size() - i);
        for (auto& fr : dec.feed(ByteSpan(stream.data() + i, n)))
          out.push_back(fr);
      }
      CHECK(out == frames);
      CHECK(dec.buffered() == 0);
    }
  }

  TEST_CASE("routes file")
  {
    std::istringstream in("# comment\n/OGB/12/41 engine-1\n\n/OGB/12/42 engine-2 # tail\n");
    auto routes = load_routes(in);
    REQUIRE(routes.size() == 2);
    CHECK(routes[1].prefix == Name::parse("/OGB/12/42"));
    CHECK(routes[1].node == "engine-2");
    std::istringstream bad("/OGB/12/41\n");
    CHECK_THROWS(load_routes(bad));
  }

  TEST_CASE("tcp faces connect two forwarders")
  {
    auto clock = system_clock();
    Forwarder a("a", clock), b("b", clock);
    std::shared_ptr<TcpFace> server_face;
    std::mutex m;
    std::condition_variable cv;
    TcpListener listener(0, [&](int fd) {
      auto face = std::make_shared<TcpFace>("accepted", fd);
      b.add_face(face);
      face->start();
      std::lock_guard lock(m);
      server_face = face;
      cv.notify_all();
    });
    auto client = std::make_shared<TcpFace>("client", connect_tcp("127.0.0.1", listener.port()));
    auto cid = a.add_face(client);
    client->start();
    {
      std::unique_lock lock(m);
      cv.wait(lock, [&] { return server_face != nullptr; });
    }
    a.add_route(Name::parse("/remote"), cid);

    auto producer = AppFace::attach(b, "producer");
    auto content = random_bytes(40'000, 9);
    auto segs = std::make_shared<std::vector<Data>>(segment(Name::parse("/remote/obj"), content));
    producer->set_interest_filter(Name::parse("/remote"), [segs, producer](const Interest& i) {
      producer->put((*segs)[*parse_segment(i.name.back())]);
    });
    auto consumer = AppFace::attach(a, "consumer");
    CHECK(get(*consumer, Name::parse("/remote/obj")) == content);

    consumer->close();
    producer->close();
    client->close();
    server_face->close();
    listener.stop();
  }
}
