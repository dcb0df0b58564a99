#include "ogb/frontend/service.hpp"
#include "ogb/perf/bench.hpp"
#include "ogb/perf/config.hpp"
#include "ogb/perf/workload.hpp"
#include "ogb/trust/certificate.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

using namespace ogb;
using nlohmann::json;

namespace {

std::atomic<bool> g_stop{false};

void
on_signal(int)
{
  g_stop = true;
}

/// CSV goes to --out when given, stdout otherwise.
struct Output
{
  std::ofstream file;
  std::ostream* os = &std::cout;

  explicit Output(const std::string& path)
  {
    if (path.empty() || path == "-")
      return;
    file.open(path);
    if (!file)
      throw std::runtime_error("cannot write " + path);
    os = &file;
  }
};

std::pair<std::string, std::uint16_t>
endpoint(const std::string& s)
{
  return icn::parse_endpoint(s);
}

std::vector<json>
read_features(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open " + path);
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  std::vector<json> out;
  try {
    auto doc = json::parse(text);
    if (doc.value("type", "") == "FeatureCollection")
      for (auto& f : doc.at("features"))
        out.push_back(std::move(f));
    else
      out.push_back(std::move(doc));
    return out;
  }
  catch (const json::parse_error&) {
  }
  // one Feature per line
  std::istringstream lines(text);
  std::string line;
  while (std::getline(lines, line))
    if (line.find_first_not_of(" \t\r") != std::string::npos)
      out.push_back(json::parse(line));
  return out;
}

int
cluster_run(const std::string& config_path, double duration_s)
{
  auto file = perf::load_cluster_file(config_path);
  perf::Cluster cluster(file.cluster);
  std::map<std::string, std::unique_ptr<frontend::Frontend>> frontends;
  std::map<std::string, std::string> by_dataset;
  for (const auto& u : file.users) {
    frontend::FrontendOptions fo;
    fo.cost = file.cluster.cost;
    frontends[u.handle()] = cluster.frontend(cluster.make_user(u.tid, u.cid, u.uid, u.write), fo);
  }
  for (const auto& path : file.preload) {
    auto features = read_features(path);
    std::map<std::string, std::vector<geo::Feature>> groups;
    for (const auto& f : features) {
      auto parsed = geo::parse_feature(f.dump());
      groups[parsed.tid + ":" + parsed.cid + "/" + parsed.uid].push_back(std::move(parsed));
    }
    for (auto& [handle, group] : groups) {
      auto it = frontends.find(handle);
      if (it == frontends.end())
        throw std::runtime_error(path + ": no configured user " + handle);
      auto r = it->second->insert(group);
      std::cerr << "preloaded " << group.size() << " features for " << handle << " (" << r.rejected.size()
                << " rejected)\n";
    }
  }
  frontend::Service service(std::move(frontends), file.service_port, file.service_host);
  std::cout << "engines " << cluster.engine_count() << ", BF server " << (file.cluster.bf_server ? "on" : "off")
            << ", listening on " << file.service_host << ":" << service.port() << std::endl;
  std::signal(SIGINT, on_signal);
  std::signal(SIGTERM, on_signal);
  auto until = std::chrono::steady_clock::now() + std::chrono::duration<double>(duration_s > 0 ? duration_s : 1e9);
  while (!g_stop && std::chrono::steady_clock::now() < until)
    std::this_thread::sleep_for(std::chrono::milliseconds(100));
  service.stop();
  return 0;
}

int
ingest(const std::string& path, const std::string& connect, std::string user, std::size_t batch)
{
  auto features = read_features(path);
  auto [host, port] = endpoint(connect);
  frontend::ServiceClient client(host, port);
  std::size_t objects = 0, rejected = 0, failed = 0;
  for (std::size_t i = 0; i < features.size(); i += batch) {
    auto end = std::min(features.size(), i + batch);
    // group by owner unless a user handle is forced
    std::map<std::string, json> groups;
    for (std::size_t k = i; k < end; ++k) {
      const auto& p = features[k].at("properties");
      auto handle = user.empty() ? p.at("tid").get<std::string>() + ":" + p.at("cid").get<std::string>() + "/" +
                                     p.at("uid").get<std::string>()
                                 : user;
      groups[handle].push_back(features[k]);
    }
    for (auto& [handle, group] : groups) {
      auto reply = json::parse(client.call(json{{"op", "insert"}, {"user", handle}, {"features", group}}.dump()));
      if (reply.contains("error")) {
        std::cerr << "insert for " << handle << " failed: " << reply["error"].get<std::string>() << "\n";
        failed += group.size();
        continue;
      }
      objects += reply.value("objects", std::size_t{0});
      rejected += reply["rejected"].size();
    }
  }
  std::cout << "features " << features.size() << " objects " << objects << " rejected " << rejected << " failed "
            << failed << "\n";
  return rejected || failed ? 1 : 0;
}

int
query(const std::string& connect, const std::string& user, const std::vector<double>& bbox, const std::string& mode,
      std::size_t k, bool bf)
{
  auto [host, port] = endpoint(connect);
  frontend::ServiceClient client(host, port);
  json req{{"op", "query"}, {"user", user}, {"bbox", bbox}, {"mode", mode}, {"k", k}, {"bf", bf}};
  auto reply = json::parse(client.call(req.dump()));
  std::cout << reply.dump(2) << "\n";
  return reply.value("ok", false) ? 0 : 1;
}

void
report_fit(const std::vector<perf::BatchPoint>& points)
{
  std::vector<perf::Measurement> m;
  for (const auto& p : points)
    m.push_back(p.measurement());
  try {
    auto fit = perf::fit_constants(m);
    std::cerr << "fit: C1=" << fit.params.c1 << " ms C2=" << fit.params.c2 << " ms C3=" << fit.params.c3
              << " ms P_db=" << fit.params.p_db << " P_qh=" << fit.params.p_qh << " R2=" << fit.r2 << "\n";
  }
  catch (const perf::FitError& e) {
    std::cerr << "fit: " << e.what() << "\n";
  }
}

} // namespace

int
main(int argc, char** argv)
{
  CLI::App app{"OpenGeoBase-style geo database over an in-process ICN fabric"};
  app.require_subcommand(1);

  // keys and certificates
  auto* keygen = app.add_subcommand("keygen", "generate identities (key pair + certificate)");
  keygen->require_subcommand(1);
  std::string out, anchor_path, tenant_path, tid, cid, uid, engine_id, key_type = "ed25519";
  bool read_only = false;
  auto add_type = [&](CLI::App* c) {
    c->add_option("--keys", key_type, "ed25519 or hmac")->check(CLI::IsMember({"ed25519", "hmac"}));
  };
  auto sig = [&] { return key_type == "hmac" ? icn::SignatureType::HmacSha256 : icn::SignatureType::Ed25519; };
  auto* kg_anchor = keygen->add_subcommand("anchor", "self-signed trust anchor");
  kg_anchor->add_option("--out", out)->required();
  add_type(kg_anchor);
  auto* kg_tenant = keygen->add_subcommand("tenant", "tenant certificate issued by the anchor");
  kg_tenant->add_option("--anchor", anchor_path)->required()->check(CLI::ExistingFile);
  kg_tenant->add_option("--tid", tid)->required();
  kg_tenant->add_option("--out", out)->required();
  add_type(kg_tenant);
  auto* kg_engine = keygen->add_subcommand("engine", "engine certificate issued by the anchor");
  kg_engine->add_option("--anchor", anchor_path)->required()->check(CLI::ExistingFile);
  kg_engine->add_option("--id", engine_id)->required();
  kg_engine->add_option("--out", out)->required();
  add_type(kg_engine);
  auto* kg_user = keygen->add_subcommand("user", "user certificate issued by a tenant");
  kg_user->add_option("--tenant", tenant_path)->required()->check(CLI::ExistingFile);
  kg_user->add_option("--tid", tid)->required();
  kg_user->add_option("--cid", cid)->required();
  kg_user->add_option("--uid", uid)->required();
  kg_user->add_flag("--read-only", read_only, "r instead of rw");
  kg_user->add_option("--out", out)->required();
  add_type(kg_user);
  std::string show_path;
  auto* kg_show = keygen->add_subcommand("show", "print an identity's certificate");
  kg_show->add_option("file", show_path)->required()->check(CLI::ExistingFile);

  // cluster
  auto* cluster = app.add_subcommand("cluster", "run an in-process cluster");
  cluster->require_subcommand(1);
  auto* run = cluster->add_subcommand("run", "start engines, BF server and the front-end service");
  std::string config;
  double duration = 0;
  run->add_option("--config", config, "cluster file (YAML)")->required()->check(CLI::ExistingFile);
  run->add_option("--duration", duration, "seconds to run; 0 runs until interrupted");

  std::string connect = "127.0.0.1:7070", user, geojson;
  std::size_t batch = 1000;
  auto* ing = app.add_subcommand("ingest", "insert a GeoJSON file through a running front-end service");
  ing->add_option("file", geojson, "Feature, FeatureCollection or one Feature per line")
    ->required()
    ->check(CLI::ExistingFile);
  ing->add_option("--connect", connect, "front-end service host:port");
  ing->add_option("--user", user, "tid:cid/uid handle; defaults to each feature's owner");
  ing->add_option("--batch", batch)->check(CLI::PositiveNumber);

  std::vector<double> bbox;
  std::string mode = "intersect";
  std::size_t qk = 50;
  bool qbf = false;
  auto* qry = app.add_subcommand("query", "range query through a running front-end service");
  qry->add_option("--connect", connect);
  qry->add_option("--user", user)->required();
  qry->add_option("--bbox", bbox, "min_lng min_lat max_lng max_lat")->required()->expected(4);
  qry->add_option("--mode", mode)->check(CLI::IsMember({"intersect", "include"}));
  qry->add_option("-k", qk, "tile constraint; 0 is unconstrained");
  qry->add_flag("--bf", qbf, "Bloom filter pre-filtering");

  // benchmarks
  auto* bench = app.add_subcommand("bench", "benchmarks emitting CSV");
  bench->require_subcommand(1);
  std::string csv;
  std::vector<std::size_t> engines{1, 4}, n_qs{100, 250, 500, 750, 1000}, ks{50};
  std::vector<int> levels{2, 1};
  std::vector<double> hs{0, 0.25, 0.5, 0.75, 1}, areas = perf::area_sweep_km2();
  std::size_t nq = 500, queries = 20, features = 20'000, workers = 8;
  int level = 2;
  double bandwidth_mbps = 200, area = 100, window = 10, lo = 1, hi = 200, resolution = 2;
  bool fit = false;
  std::string bf_mode = "both";
  std::uint64_t seed = 1;

  auto* tb = bench->add_subcommand("tile-batch", "batch duration vs number of tile-queries");
  tb->add_option("--engines", engines)->delimiter(',');
  tb->add_option("--levels", levels, "2 = 1x1 km tiles (N_i=1), 1 = 10x10 km tiles (N_i=100)")->delimiter(',');
  tb->add_option("--nq", n_qs)->delimiter(',');
  tb->add_option("--bandwidth-mbps", bandwidth_mbps);
  tb->add_flag("--fit", fit, "fit the model constants and print them to stderr");
  tb->add_option("--seed", seed);
  tb->add_option("--out", csv);

  auto* cs = bench->add_subcommand("cache-sweep", "batch duration vs engine cache hit probability");
  std::size_t cs_engines = 4;
  cs->add_option("--engines", cs_engines);
  cs->add_option("--level", level);
  cs->add_option("--nq", nq);
  cs->add_option("--hit", hs, "cache hit probabilities")->delimiter(',');
  cs->add_option("--bandwidth-mbps", bandwidth_mbps);
  cs->add_option("--seed", seed);
  cs->add_option("--out", csv);

  auto* as = bench->add_subcommand("area-sweep", "range-query time vs area on a sparse dataset");
  as->add_option("--areas", areas, "km^2")->delimiter(',');
  as->add_option("-k", ks)->delimiter(',');
  as->add_option("--bf", bf_mode)->check(CLI::IsMember({"on", "off", "both"}));
  as->add_option("--queries", queries);
  as->add_option("--features", features);
  as->add_option("--seed", seed);
  as->add_option("--out", csv);

  auto* mr = bench->add_subcommand("max-rate", "highest Poisson rate with stable query delay");
  mr->add_option("--area", area, "km^2 per range query");
  mr->add_option("--window", window, "seconds per probe");
  mr->add_option("--workers", workers);
  mr->add_option("--lo", lo);
  mr->add_option("--hi", hi);
  mr->add_option("--resolution", resolution);
  mr->add_option("--features", features);
  mr->add_option("--seed", seed);
  mr->add_option("--out", csv);

  auto* ts = bench->add_subcommand("tessellation-sweep", "tile count and stretch vs range-query area");
  std::vector<std::size_t> ts_ks{5, 19, 50, 100, 200, 400};
  std::size_t ts_queries = 200;
  ts->add_option("--areas", areas, "km^2")->delimiter(',');
  ts->add_option("-k", ts_ks)->delimiter(',');
  ts->add_option("--queries", ts_queries);
  ts->add_option("--seed", seed);
  ts->add_option("--out", csv);

  CLI11_PARSE(app, argc, argv);

  try {
    SystemClock clock;
    if (*kg_anchor) {
      trust::save_identity(trust::make_anchor(clock, sig()), out);
    }
    else if (*kg_tenant) {
      trust::save_identity(trust::make_tenant(trust::load_identity(anchor_path), tid, clock, sig()), out);
    }
    else if (*kg_engine) {
      trust::save_identity(trust::make_engine(trust::load_identity(anchor_path), engine_id, clock, sig()), out);
    }
    else if (*kg_user) {
      trust::save_identity(trust::make_user(trust::load_identity(tenant_path), tid, cid, uid, !read_only, clock, sig()),
                           out);
    }
    else if (*kg_show) {
      auto id = trust::load_identity(show_path);
      std::cout << "name       " << id.cert.kl_name.to_uri() << "\nissuer     " << id.cert.issuer.to_uri()
                << "\nvalidity   " << id.cert.not_before << " .. " << id.cert.not_after << "\n";
    }
    else if (*run) {
      return cluster_run(config, duration);
    }
    else if (*ing) {
      return ingest(geojson, connect, user, batch);
    }
    else if (*qry) {
      return query(connect, user, bbox, mode, qk, qbf);
    }
    else if (*tb) {
      Output o(csv);
      std::vector<perf::BatchPoint> all;
      for (auto n : engines) {
        perf::LabOptions lo_;
        lo_.engines = n;
        lo_.bandwidth_bps = bandwidth_mbps * 1e6;
        perf::Lab lab(lo_);
        std::cerr << n << " engine(s): ingested " << lab.objects() << " points in " << lab.ingest_seconds() << " s\n";
        auto pts = perf::tile_batch_sweep(lab, levels, n_qs, seed);
        all.insert(all.end(), pts.begin(), pts.end());
      }
      perf::write_batch_csv(*o.os, all);
      if (fit)
        report_fit(all);
    }
    else if (*cs) {
      Output o(csv);
      perf::LabOptions lo_;
      lo_.engines = cs_engines;
      lo_.bandwidth_bps = bandwidth_mbps * 1e6;
      perf::Lab lab(lo_);
      perf::write_batch_csv(*o.os, perf::cache_sweep(lab, level, nq, hs, seed));
    }
    else if (*as) {
      Output o(csv);
      perf::RangeOptions ro;
      ro.features = features;
      ro.seed = seed;
      perf::RangeLab lab(ro);
      std::vector<bool> bf;
      if (bf_mode != "on")
        bf.push_back(false);
      if (bf_mode != "off")
        bf.push_back(true);
      perf::write_area_csv(*o.os, perf::area_sweep(lab, areas, ks, bf, queries, seed));
    }
    else if (*mr) {
      Output o(csv);
      perf::RangeOptions ro;
      ro.features = features;
      ro.seed = seed;
      ro.cost.enabled = true;
      perf::RangeLab lab(ro);
      *o.os << "rate,stable,queries,mean_ms,p_increasing,slope_ms_per_query\n";
      auto probe = [&](double rate) {
        auto r = perf::poisson_run(lab, rate, window, area, workers, seed);
        auto t = perf::mann_kendall(r.latencies_ms);
        *o.os << rate << ',' << perf::stable(r.latencies_ms) << ',' << r.latencies_ms.size() << ',' << r.mean() << ','
              << t.p_increasing << ',' << t.slope << std::endl;
        return r.latencies_ms;
      };
      auto r = perf::max_rate_search(probe, lo, hi, resolution);
      std::cerr << "max stable rate " << r.rate << " queries/s (unstable at " << r.unstable << ")\n";
    }
    else if (*ts) {
      Output o(csv);
      perf::write_tess_csv(*o.os, perf::tessellation_sweep(areas, ts_ks, ts_queries, seed));
    }
  }
  catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
