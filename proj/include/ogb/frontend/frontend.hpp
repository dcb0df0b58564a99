#pragma once

#include "ogb/bloom/service.hpp"
#include "ogb/common/cost.hpp"
#include "ogb/engine/objects.hpp"
#include "ogb/icn/segment.hpp"
#include "ogb/trust/access.hpp"

#include <map>

namespace ogb::frontend {

class QueryError : public std::runtime_error
{
public:
  QueryError(const std::string& what, std::vector<icn::Name> failed)
    : std::runtime_error(what)
    , failed(std::move(failed))
  {
  }

  std::vector<icn::Name> failed;
};

class InsertError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class Mode { Intersect, Include };

struct RangeQuery
{
  geo::BBox bbox;
  Mode mode = Mode::Intersect;
  std::string tid;
  std::string cid;
  std::optional<geo::TimeInterval> interval;
  /// Maximum number of tiles; 0 means unconstrained (minimum-count
  /// minimum-stretch cover).
  std::size_t k = 50;
  bool use_bf = false;
  /// Tile-queries in flight; 0 uses the front-end default.
  std::size_t parallelism = 0;
};

struct QueryStats
{
  double tessellation_ms = 0;
  double bf_ms = 0;
  double batch_ms = 0;
  double postfilter_ms = 0;
  std::size_t tiles = 0;
  std::size_t tiles_after_bf = 0;
  std::size_t subqueries = 0;
  std::size_t items = 0;
  std::size_t references_resolved = 0;
  std::size_t validation_failures = 0;
  std::size_t max_in_flight = 0;
  bool bf_fallback = false;
  bool constraint_respected = true;
};

struct QueryResult
{
  std::vector<geo::Feature> objects;
  QueryStats stats;
};

struct FrontendOptions
{
  std::size_t parallelism = 32;
  Millis lifetime{4000};
  int retries = 2;
  /// Freshness given to OGB-Data items created by insert.
  Millis object_freshness{10'000};
  /// Emulated query-handler cost (share 1 - p_db per tile-query, plus c3
  /// per batch).
  CostModel cost;
};

struct InsertReport
{
  std::size_t objects = 0;
  std::size_t masters = 0;
  std::size_t ip_res_exchanges = 0;
  std::size_t pushes = 0;
  /// Items rejected by engines, with their status.
  std::vector<std::pair<icn::Name, engine::InsertStatus>> rejected;

  bool ok() const { return rejected.empty(); }
};

struct DeleteReport
{
  engine::DeleteStatus status = engine::DeleteStatus::Ok;
  std::size_t dinterests = 0;
  /// Tiles whose engine did not answer, or answered differently from Ok.
  std::vector<std::pair<icn::Name, std::optional<engine::DeleteStatus>>> per_tile;
};

struct TileReply
{
  icn::Name name;
  std::vector<icn::Data> items;
  std::size_t bytes = 0;
};

struct BatchResult
{
  double duration_ms = 0;
  std::size_t items = 0;
  std::size_t bytes = 0;
  std::size_t max_in_flight = 0;
  std::size_t validation_failures = 0;
};

/// Front-end library instance acting for one user.
class Frontend
{
public:
  Frontend(std::shared_ptr<icn::AppFace> face, trust::Identity user, std::shared_ptr<trust::Validator> validator,
           FrontendOptions options = {});

  QueryResult
  range_query(const RangeQuery& q);

  /// Tiles the BF server reports non-void; the input unchanged when the
  /// server does not answer (fell_back is then set).
  std::vector<geo::TileId>
  prefilter(const std::vector<geo::TileId>& tiles, const std::string& tid, const std::string& cid,
            bool* fell_back = nullptr);

  /// Tile-query names for every tile/period couple, or one per tile
  /// without an interval.
  std::vector<engine::TileQuery>
  subqueries(const std::vector<geo::TileId>& tiles, const std::string& tid, const std::string& cid,
             const std::optional<geo::TimeInterval>& interval) const;

  /// Tessellation (+ temporal decomposition) of a range-query as sub-query names.
  std::vector<icn::Name>
  decompose(const RangeQuery& q) const;

  InsertReport
  insert(const std::string& geojson);

  InsertReport
  insert(const std::vector<geo::Feature>& features);

  /// Removes every item of the feature; the geometry identifies the tiles.
  DeleteReport
  remove(const geo::Feature& feature);

  /// Fetches and validates a batch of tile-queries (the tile-querying phase
  /// alone).
  BatchResult
  tile_batch(const std::vector<engine::TileQuery>& queries, std::size_t parallelism = 0);

  /// Endpoint of the engine owning a tile (IP-RES, cached for its freshness).
  std::string
  resolve(const geo::TileId& tile, bool* exchanged = nullptr);

  void set_cost(const CostModel& cost) { m_options.cost = cost; }

  const trust::Identity& user() const { return m_user; }
  std::uint64_t validation_failures() const { return m_validation_failures.load(); }

private:
  std::vector<TileReply>
  fetch_tiles(const std::vector<icn::Name>& names, std::size_t parallelism, std::size_t& max_in_flight,
              std::size_t& failures);

  bool
  valid_item(const icn::Data& d);

  std::shared_ptr<icn::AppFace> m_face;
  trust::Identity m_user;
  trust::Signer m_signer;
  std::shared_ptr<trust::Validator> m_validator;
  FrontendOptions m_options;
  bloom::BloomClient m_bloom;
  SerialTimeline m_handler;

  std::mutex m_resolve_mutex;
  std::map<geo::TileId, std::pair<std::string, SteadyTime>> m_resolved;

  std::atomic<std::uint64_t> m_validation_failures{0};
};

/// Splits "a OR b OR c" conditions into one qName {sid}/{did}/{condition}
/// per disjunct.
std::vector<icn::Name>
split_or_query(const std::string& sid, const std::string& did, const std::string& conditions);

/// Linear-scan reference: features satisfying the query predicates.
bool
matches(const geo::Feature& f, const RangeQuery& q);

} // namespace ogb::frontend
