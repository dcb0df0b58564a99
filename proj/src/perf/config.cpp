#include "ogb/perf/config.hpp"

#include <yaml-cpp/yaml.h>

#include <fstream>

namespace ogb::perf {

namespace {

geo::BBox
read_box(const YAML::Node& n)
{
  if (!n.IsSequence() || n.size() != 4)
    throw ConfigError("region must be [min_lng, min_lat, max_lng, max_lat]");
  geo::BBox b{{n[0].as<double>(), n[1].as<double>()}, {n[2].as<double>(), n[3].as<double>()}};
  if (b.max.lng <= b.min.lng || b.max.lat <= b.min.lat)
    throw ConfigError("region is empty");
  return b;
}

icn::SignatureType
read_keys(const std::string& s)
{
  if (s == "ed25519")
    return icn::SignatureType::Ed25519;
  if (s == "hmac")
    return icn::SignatureType::HmacSha256;
  throw ConfigError("keys must be ed25519 or hmac, got " + s);
}

} // namespace

ClusterFile
parse_cluster_file(std::istream& in)
{
  YAML::Node root;
  try {
    root = YAML::Load(in);
  }
  catch (const YAML::Exception& e) {
    throw ConfigError(std::string("cluster file: ") + e.what());
  }
  if (!root.IsMap())
    throw ConfigError("cluster file must be a mapping");

  ClusterFile out;
  try {
    if (root["region"])
      out.region = read_box(root["region"]);

    auto engines = root["engines"];
    if (!engines || (engines.IsScalar() && engines.as<int>() <= 0))
      throw ConfigError("engines: a positive count or a list is required");
    if (engines.IsScalar()) {
      out.cluster.engines = split_region(out.region, engines.as<std::size_t>());
    }
    else {
      for (const auto& e : engines) {
        EngineSpec spec;
        spec.id = e["id"].as<std::string>();
        for (const auto& t : e["tiles"]) {
          if (!t.IsSequence() || t.size() != 2)
            throw ConfigError("engine " + spec.id + ": tiles are [lng, lat] level-0 corners");
          spec.owned.push_back(geo::tile_of({t[0].as<double>() + 0.5, t[1].as<double>() + 0.5}, 0));
        }
        if (spec.owned.empty())
          throw ConfigError("engine " + spec.id + " owns no tiles");
        out.cluster.engines.push_back(std::move(spec));
      }
    }

    if (auto bf = root["bloom"]) {
      out.cluster.bf_server = bf["enabled"].as<bool>(true);
      out.cluster.bf_capacity = bf["capacity"].as<std::size_t>(out.cluster.bf_capacity);
    }
    if (auto link = root["link"])
      out.cluster.bandwidth_bps = link["bandwidth_mbps"].as<double>(0) * 1e6;
    if (root["keys"])
      out.cluster.key_type = read_keys(root["keys"].as<std::string>());
    out.cluster.engine_workers = root["engine_workers"].as<std::size_t>(out.cluster.engine_workers);
    if (auto c = root["cost"]) {
      auto& cost = out.cluster.cost;
      cost.enabled = c["enabled"].as<bool>(true);
      cost.c1_ms = c["c1_ms"].as<double>(cost.c1_ms);
      cost.c2_ms = c["c2_ms"].as<double>(cost.c2_ms);
      cost.c3_ms = c["c3_ms"].as<double>(cost.c3_ms);
      cost.p_db = c["p_db"].as<double>(cost.p_db);
      if (cost.p_db < 0 || cost.p_db > 1)
        throw ConfigError("cost.p_db must lie in [0, 1]");
    }
    if (auto s = root["service"]) {
      out.service_host = s["host"].as<std::string>(out.service_host);
      out.service_port = s["port"].as<std::uint16_t>(out.service_port);
    }
    for (const auto& u : root["users"]) {
      UserSpec spec{u["tid"].as<std::string>(), u["cid"].as<std::string>(), u["uid"].as<std::string>(),
                    u["write"].as<bool>(true)};
      out.users.push_back(std::move(spec));
    }
    for (const auto& p : root["preload"])
      out.preload.push_back(p.as<std::string>());
  }
  catch (const YAML::Exception& e) {
    throw ConfigError(std::string("cluster file: ") + e.what());
  }
  if (out.users.empty())
    throw ConfigError("users: at least one user is required");
  return out;
}

ClusterFile
load_cluster_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw ConfigError("cannot open " + path);
  return parse_cluster_file(in);
}

} // namespace ogb::perf
