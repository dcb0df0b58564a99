#include "ogb/perf/cluster.hpp"

#include <cmath>

namespace ogb::perf {

std::vector<EngineSpec>
split_region(const geo::BBox& region, std::size_t n)
{
  auto tiles = geo::tiles_in_box(region, 0);
  if (n == 0 || tiles.empty())
    throw std::invalid_argument("split_region: need engines and tiles");
  std::sort(tiles.begin(), tiles.end(), [](const geo::TileId& a, const geo::TileId& b) {
    return std::tie(a.ix, a.iy) < std::tie(b.ix, b.iy);
  });
  std::vector<EngineSpec> out(std::min(n, tiles.size()));
  for (std::size_t i = 0; i < out.size(); ++i)
    out[i].id = "e" + std::to_string(i + 1);
  for (std::size_t i = 0; i < tiles.size(); ++i)
    out[i * out.size() / tiles.size()].owned.push_back(tiles[i]);
  return out;
}

Cluster::Cluster(ClusterConfig config)
  : m_config(std::move(config))
  , m_clock(system_clock())
  , m_bloom_params(bloom::params_for(m_config.bf_capacity))
  , m_anchor(trust::make_anchor(*m_clock, m_config.key_type))
{
  icn::ForwarderOptions fo;
  fo.cs_capacity = m_config.cs_capacity;
  m_router = std::make_unique<icn::Forwarder>("router", m_clock, fo);

  m_repo_face = icn::AppFace::attach(*m_router, "cert-repo");
  m_repo = std::make_unique<trust::CertRepo>(m_repo_face);
  m_repo->publish(m_anchor.cert);

  std::set<std::string> engine_ids;
  for (const auto& spec : m_config.engines)
    engine_ids.insert(spec.id);

  for (const auto& spec : m_config.engines) {
    auto node = std::make_unique<EngineNode>();
    node->node = std::make_unique<icn::Forwarder>(spec.id, m_clock, fo);
    auto [to_router, from_engine] = icn::make_link("link:" + spec.id);
    auto up = node->node->add_face(to_router);
    auto down = m_router->add_face(from_engine);
    node->node->add_route(icn::Name{}, up);
    for (const auto& t : spec.owned)
      m_router->add_route(geo::routing_prefix(t), down);

    auto identity = trust::make_engine(m_anchor, spec.id, *m_clock, m_config.key_type);
    m_repo->publish(identity.cert);
    node->client = icn::AppFace::attach(*node->node, spec.id + ":client");

    engine::EngineOptions eo;
    eo.id = spec.id;
    eo.owned = spec.owned;
    eo.bloom = m_bloom_params;
    eo.publish_bloom = m_config.bf_server;
    eo.cost = m_config.cost;
    eo.workers = m_config.engine_workers;
    eo.tile_freshness = m_config.tile_freshness;
    node->engine = std::make_unique<engine::Engine>(*node->node, identity, make_validator(node->client), eo);
    m_engines.push_back(std::move(node));
  }

  if (m_config.bf_server) {
    m_bloom_face = icn::AppFace::attach(*m_router, "bf-server", {2, {}, {}});
    m_bloom_client = icn::AppFace::attach(*m_router, "bf-server:client");
    m_bloom = std::make_unique<bloom::BloomServer>(m_bloom_face, m_bloom_params, make_validator(m_bloom_client),
                                                   engine_ids);
  }
  for (auto& e : m_engines)
    e->engine->start();
}

Cluster::~Cluster()
{
  for (auto& e : m_engines)
    e->engine->stop();
  m_bloom.reset();
  if (m_bloom_face)
    m_bloom_face->close();
  if (m_bloom_client)
    m_bloom_client->close();
  for (auto& e : m_engines)
    e->client->close();
  for (auto& f : m_frontends)
    f->face->close();
  m_repo_face->close();
}

std::shared_ptr<trust::Validator>
Cluster::make_validator(std::shared_ptr<icn::AppFace> face)
{
  return std::make_shared<trust::Validator>(m_anchor.cert, m_clock, trust::make_fetcher(face));
}

const trust::Identity&
Cluster::tenant(const std::string& tid)
{
  std::lock_guard lock(m_mutex);
  auto it = m_tenants.find(tid);
  if (it == m_tenants.end()) {
    auto t = trust::make_tenant(m_anchor, tid, *m_clock, m_config.key_type);
    m_repo->publish(t.cert);
    it = m_tenants.emplace(tid, std::move(t)).first;
  }
  return it->second;
}

trust::Identity
Cluster::make_user(const std::string& tid, const std::string& cid, const std::string& uid, bool write)
{
  const auto& t = tenant(tid);
  auto u = trust::make_user(t, tid, cid, uid, write, *m_clock, m_config.key_type);
  m_repo->publish(u.cert);
  return u;
}

std::unique_ptr<frontend::Frontend>
Cluster::frontend(const trust::Identity& user, frontend::FrontendOptions options)
{
  auto fe = std::make_unique<FrontendNode>();
  icn::ForwarderOptions fo;
  fo.cs_capacity = m_config.cs_capacity;
  std::string name;
  {
    std::lock_guard lock(m_mutex);
    name = "fe" + std::to_string(m_frontends.size() + 1);
  }
  fe->node = std::make_unique<icn::Forwarder>(name, m_clock, fo);
  icn::ChannelOptions shaped;
  shaped.bandwidth_bps = m_config.bandwidth_bps;
  auto [to_router, from_frontend] = icn::make_link("link:" + name, {}, shaped);
  auto up = fe->node->add_face(to_router);
  m_router->add_face(from_frontend);
  fe->node->add_route(icn::Name{}, up);
  fe->face = icn::AppFace::attach(*fe->node, name + ":app");
  if (m_config.cost.enabled && !options.cost.enabled)
    options.cost = m_config.cost;
  auto out = std::make_unique<frontend::Frontend>(fe->face, user, make_validator(fe->face), options);
  std::lock_guard lock(m_mutex);
  m_frontends.push_back(std::move(fe));
  return out;
}

engine::Engine*
Cluster::owner(const geo::TileId& tile)
{
  for (auto& e : m_engines)
    if (e->engine->owns(tile))
      return e->engine.get();
  return nullptr;
}

bool
Cluster::flush_bloom(Millis timeout)
{
  bool ok = true;
  for (auto& e : m_engines)
    ok &= e->engine->flush_bloom(timeout);
  return ok;
}

void
Cluster::set_cost(const CostModel& cost)
{
  m_config.cost = cost;
  for (auto& e : m_engines)
    e->engine->set_cost(cost);
}

void
Cluster::clear_caches()
{
  for (auto& e : m_engines) {
    e->engine->clear_qdata_cache();
    e->node->clear_cache();
  }
  m_router->clear_cache();
  for (auto& f : m_frontends)
    f->node->clear_cache();
}

} // namespace ogb::perf
