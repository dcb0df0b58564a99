#pragma once

#include "ogb/bloom/service.hpp"
#include "ogb/common/cost.hpp"
#include "ogb/engine/objects.hpp"
#include "ogb/icn/segment.hpp"
#include "ogb/icn/tcp.hpp"
#include "ogb/trust/access.hpp"

#include <list>
#include <set>
#include <shared_mutex>

namespace ogb::engine {

struct EngineOptions
{
  std::string id = "e1";
  /// Level-0 tiles whose names this engine serves.
  std::vector<geo::TileId> owned;
  std::string bind_host = "127.0.0.1";
  /// Bulk-insert port; 0 picks an ephemeral one.
  std::uint16_t bulk_port = 0;
  /// Address reported by IP-RES; empty means bind_host.
  std::string advertise_host;
  /// Freshness of OGB-Tile replies; 0 keeps them out of forwarder caches.
  Millis tile_freshness{0};
  Millis ip_res_freshness{2000};
  std::size_t max_segment_payload = icn::kDefaultMaxPayload;
  /// QDataCache entries (tile-query names) kept in LRU order.
  std::size_t qdata_capacity = 50'000;
  bloom::BloomParams bloom;
  /// Send CBF transitions to the BF server.
  bool publish_bloom = false;
  CostModel cost;
  std::size_t workers = 4;
  /// Append-only log replayed at start; empty disables persistence.
  std::string snapshot_path;
};

struct EngineCounters
{
  std::uint64_t tile_queries = 0;
  std::uint64_t cache_hits = 0;
  std::uint64_t cache_misses = 0;
  std::uint64_t index_lookups = 0;
  std::uint64_t denied = 0;
  std::uint64_t malformed = 0;
  std::uint64_t inserted = 0;
  std::uint64_t rejected = 0;
  std::uint64_t deleted = 0;
  std::uint64_t ip_res = 0;
  std::uint64_t object_fetches = 0;
};

struct StoredObject
{
  icn::Data data;
  Bytes wire;
  DataName name;
  ObjectKind kind = ObjectKind::Master;
  std::optional<geo::TimeInterval> valid_time;
};

/// Back-end database engine attached to its own forwarder node.
class Engine
{
public:
  Engine(icn::Forwarder& forwarder, trust::Identity identity, std::shared_ptr<trust::Validator> validator,
         EngineOptions options);
  ~Engine();

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  /// Registers name prefixes and opens the bulk-insert listener.
  void
  start();

  void
  stop();

  /// host:port of the bulk-insert listener.
  std::string
  endpoint() const;

  const std::string& id() const { return m_options.id; }
  const EngineOptions& options() const { return m_options; }
  const trust::Identity& identity() const { return m_identity; }

  bool
  owns(const geo::TileId& tile) const;

  /// Validates and commits signed OGB-Data items; one status per item.
  std::vector<InsertStatus>
  insert(const std::vector<icn::Data>& objects);

  /// Handles a signed <data-name>/DELETE Interest.
  DeleteStatus
  remove(const icn::Interest& interest);

  /// Names in the level table of `tile` for the tenant and collection.
  std::vector<icn::Name>
  select_names(const geo::TileId& tile, const std::string& tid, const std::string& cid) const;

  /// Unsigned OGB-Tile content for a tile-query, bypassing the cache.
  Bytes
  tile_content(const TileQuery& q) const;

  std::optional<StoredObject>
  object(const icn::Name& name) const;

  std::size_t
  object_count() const;

  std::size_t
  master_count() const;

  /// Rows in the level-`level` table.
  std::size_t
  level_rows(int level) const;

  /// Builds and caches the replies of the given tile-queries.
  void
  prewarm(const std::vector<TileQuery>& queries);

  void
  clear_qdata_cache();

  std::size_t
  qdata_cache_size() const;

  bool
  bloom_contains(const std::string& key) const;

  /// Waits until all CBF transitions are acknowledged by the BF server.
  bool
  flush_bloom(Millis timeout = Millis{10'000});

  void
  set_cost(const CostModel& cost);

  EngineCounters
  counters() const;

private:
  struct TileKey
  {
    geo::TileId tile;
    std::string tid;
    std::string cid;

    friend auto operator<=>(const TileKey&, const TileKey&) = default;
  };

  struct CachedTile
  {
    std::vector<icn::Data> segments;
    std::size_t items = 0;
    std::list<icn::Name>::iterator lru;
  };

  void
  on_interest(const icn::Interest& i);

  void
  on_tile_query(const icn::Interest& i);

  void
  on_object_fetch(const icn::Interest& i);

  void
  on_ip_res(const icn::Interest& i);

  void
  on_delete(const icn::Interest& i);

  void
  on_bulk_connection(int fd);

  InsertStatus
  check(const icn::Data& d, StoredObject& out) const;

  /// Caller holds m_state exclusively.
  void
  commit(StoredObject obj);

  void
  erase(const icn::Name& name);

  void
  invalidate(const TileKey& key);

  std::vector<const StoredObject*>
  lookup(const TileQuery& q) const;

  /// Signed segments of a tile-query reply, from the cache or built.
  std::shared_ptr<const CachedTile>
  reply_for(const TileQuery& q, bool& hit);

  void
  append_snapshot(std::uint8_t op, ByteSpan wire);

  void
  replay_snapshot();

  icn::Forwarder& m_forwarder;
  trust::Identity m_identity;
  trust::Signer m_signer;
  std::shared_ptr<trust::Validator> m_validator;
  EngineOptions m_options;
  std::set<geo::TileId> m_owned;

  std::shared_ptr<icn::AppFace> m_face;
  std::unique_ptr<icn::TcpListener> m_listener;
  std::unique_ptr<bloom::UpdatePublisher> m_publisher;

  mutable std::shared_mutex m_state;
  std::map<icn::Name, StoredObject> m_objects;
  std::array<std::map<TileKey, std::set<icn::Name>>, geo::kLevels> m_tables;
  bloom::CountingBloomFilter m_cbf;
  std::uint64_t m_write_epoch = 0;

  mutable std::mutex m_cache_mutex;
  std::map<icn::Name, std::shared_ptr<CachedTile>> m_cache;
  std::map<TileKey, std::set<icn::Name>> m_cache_index;
  std::list<icn::Name> m_lru;

  SerialTimeline m_db;
  mutable std::mutex m_cost_mutex;
  CostModel m_cost;

  mutable std::mutex m_counter_mutex;
  mutable EngineCounters m_counters;

  std::mutex m_snapshot_mutex;

  std::mutex m_conn_mutex;
  std::vector<std::thread> m_conn_threads;
  std::set<int> m_conn_fds;
  bool m_running = false;
};

/// Client side of the bulk-insert protocol: a count frame, one frame per
/// OGB-Data wire, then one reply frame with a status byte per item.
std::vector<InsertStatus>
bulk_insert(const std::string& endpoint, const std::vector<icn::Data>& objects);

} // namespace ogb::engine
