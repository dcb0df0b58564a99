#pragma once

#include "ogb/engine/engine.hpp"
#include "ogb/frontend/frontend.hpp"

namespace ogb::perf {

struct EngineSpec
{
  std::string id;
  std::vector<geo::TileId> owned;
};

struct ClusterConfig
{
  std::vector<EngineSpec> engines;
  bool bf_server = true;
  /// Expected (tile, tenant, collection) keys; sizes BF and CBFs at 1% FP.
  std::size_t bf_capacity = 100'000;
  /// Router -> front-end link rate in bits/s; 0 leaves it unshaped.
  double bandwidth_bps = 0;
  icn::SignatureType key_type = icn::SignatureType::Ed25519;
  CostModel cost;
  std::size_t engine_workers = 4;
  std::size_t cs_capacity = 1000;
  Millis tile_freshness{0};
};

/// n engines splitting the level-0 tiles of a region into contiguous
/// column bands (4 engines over a 4x4 region own one 1x4 band each).
std::vector<EngineSpec>
split_region(const geo::BBox& region, std::size_t n);

/// In-process deployment: one router with the certificate repo and the BF
/// server attached, one forwarder node per engine and per front-end.
class Cluster
{
public:
  explicit Cluster(ClusterConfig config);
  ~Cluster();

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  /// Tenant identity, created and published on first use.
  const trust::Identity&
  tenant(const std::string& tid);

  /// Issues and publishes a user certificate.
  trust::Identity
  make_user(const std::string& tid, const std::string& cid, const std::string& uid, bool write = true);

  /// A front-end on its own node behind the (possibly shaped) link.
  std::unique_ptr<frontend::Frontend>
  frontend(const trust::Identity& user, frontend::FrontendOptions options = {});

  /// Validator that fetches unknown certificates through `face`.
  std::shared_ptr<trust::Validator>
  make_validator(std::shared_ptr<icn::AppFace> face);

  std::size_t engine_count() const { return m_engines.size(); }
  engine::Engine& engine(std::size_t i) { return *m_engines.at(i)->engine; }
  icn::Forwarder& engine_node(std::size_t i) { return *m_engines.at(i)->node; }
  icn::Forwarder& router() { return *m_router; }
  bloom::BloomServer* bloom_server() { return m_bloom.get(); }
  const trust::Identity& anchor() const { return m_anchor; }
  std::shared_ptr<Clock> clock() const { return m_clock; }
  const ClusterConfig& config() const { return m_config; }
  const bloom::BloomParams& bloom_params() const { return m_bloom_params; }

  /// Engine owning a tile, if any.
  engine::Engine*
  owner(const geo::TileId& tile);

  /// Waits until every engine's CBF transitions reached the BF server.
  bool
  flush_bloom(Millis timeout = Millis{10'000});

  void
  set_cost(const CostModel& cost);

  void
  clear_caches();

private:
  struct EngineNode
  {
    std::unique_ptr<icn::Forwarder> node;
    std::shared_ptr<icn::AppFace> client;
    std::unique_ptr<engine::Engine> engine;
  };

  struct FrontendNode
  {
    std::unique_ptr<icn::Forwarder> node;
    std::shared_ptr<icn::AppFace> face;
  };

  ClusterConfig m_config;
  std::shared_ptr<Clock> m_clock;
  bloom::BloomParams m_bloom_params;
  trust::Identity m_anchor;
  std::unique_ptr<icn::Forwarder> m_router;

  std::shared_ptr<icn::AppFace> m_repo_face;
  std::unique_ptr<trust::CertRepo> m_repo;
  std::shared_ptr<icn::AppFace> m_bloom_face;
  std::shared_ptr<icn::AppFace> m_bloom_client;
  std::unique_ptr<bloom::BloomServer> m_bloom;

  std::vector<std::unique_ptr<EngineNode>> m_engines;

  std::mutex m_mutex;
  std::map<std::string, trust::Identity> m_tenants;
  std::vector<std::unique_ptr<FrontendNode>> m_frontends;
};

} // namespace ogb::perf
