#include "ogb/frontend/frontend.hpp"

#include "ogb/engine/engine.hpp"

#include <condition_variable>
#include <deque>
#include <future>
#include <set>
#include <thread>

namespace ogb::frontend {

using icn::Name;

namespace {

double
ms_since(SteadyTime t0)
{
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

void
sleep_ms(double ms)
{
  if (ms > 0)
    std::this_thread::sleep_for(std::chrono::duration<double, std::milli>(ms));
}

geo::TileId
level0_of(geo::TileId t)
{
  while (t.level > 0)
    t = geo::parent(t);
  return t;
}

/// Runs `issue(i, done)` for i in [0, n) with at most `limit` outstanding
/// and hands each completion to `on_done` on the calling thread. Stops
/// issuing once on_done returns false.
template<typename Result>
bool
fan_out(std::size_t n, std::size_t limit, std::size_t& max_in_flight,
        const std::function<void(std::size_t, std::function<void(Result)>)>& issue,
        const std::function<bool(std::size_t, Result&)>& on_done)
{
  struct Shared
  {
    std::mutex mutex;
    std::condition_variable cv;
    std::deque<std::pair<std::size_t, Result>> done;
  };
  auto shared = std::make_shared<Shared>();
  limit = std::max<std::size_t>(1, limit);
  std::size_t next = 0, in_flight = 0, completed = 0;
  while (completed < n) {
    while (in_flight < limit && next < n) {
      ++in_flight;
      max_in_flight = std::max(max_in_flight, in_flight);
      auto idx = next++;
      issue(idx, [shared, idx](Result r) {
        std::lock_guard lock(shared->mutex);
        shared->done.emplace_back(idx, std::move(r));
        shared->cv.notify_one();
      });
    }
    std::pair<std::size_t, Result> item;
    {
      std::unique_lock lock(shared->mutex);
      shared->cv.wait(lock, [&] { return !shared->done.empty(); });
      item = std::move(shared->done.front());
      shared->done.pop_front();
    }
    --in_flight;
    ++completed;
    if (!on_done(item.first, item.second))
      return false;
  }
  return true;
}

} // namespace

Frontend::Frontend(std::shared_ptr<icn::AppFace> face, trust::Identity user,
                   std::shared_ptr<trust::Validator> validator, FrontendOptions options)
  : m_face(std::move(face))
  , m_user(std::move(user))
  , m_signer(m_user.signer())
  , m_validator(std::move(validator))
  , m_options(std::move(options))
  , m_bloom(m_face)
{
}

bool
Frontend::valid_item(const icn::Data& d)
{
  auto cert = m_validator->validate(d);
  if (cert && trust::check_access(trust::Operation::Insert, d.name, cert->kl_name))
    return true;
  ++m_validation_failures;
  return false;
}

std::vector<TileReply>
Frontend::fetch_tiles(const std::vector<Name>& names, std::size_t parallelism, std::size_t& max_in_flight,
                      std::size_t& failures)
{
  icn::FetchOptions fo;
  fo.lifetime = m_options.lifetime;
  fo.retries = m_options.retries;
  fo.decorate = [signer = m_signer](icn::Interest& i) { signer.sign(i); };
  auto cost = m_options.cost;

  std::vector<TileReply> replies(names.size());
  std::vector<std::vector<icn::Data>> segments(names.size());
  std::vector<Name> failed;
  std::string error;
  auto issue = [&](std::size_t idx, std::function<void(icn::FetchResult)> done) {
    icn::fetch_async(*m_face, names[idx], fo, std::move(done));
  };
  auto on_done = [&](std::size_t idx, icn::FetchResult& r) {
    if (!r.ok) {
      failed.push_back(names[idx]);
      error = r.error;
      return false;
    }
    segments[idx] = std::move(r.segments);
    return true;
  };
  if (!fan_out<icn::FetchResult>(names.size(), parallelism ? parallelism : m_options.parallelism, max_in_flight,
                                 issue, on_done))
    throw QueryError("tile-query failed for " + failed.front().to_uri() + ": " + error, failed);

  // unpacking and verification start once every reply is in; the phase is
  // charged as one slot so per-reply wake-up jitter does not add up
  auto started = std::chrono::steady_clock::now();
  double handler_ms = 0;
  for (std::size_t idx = 0; idx < names.size(); ++idx) {
    auto& reply = replies[idx];
    reply.name = names[idx];
    bool segments_ok = true;
    for (const auto& seg : segments[idx]) {
      auto cert = m_validator->validate(seg);
      if (!cert || cert->kl_name.size() < 2 || cert->kl_name[1] != "OGB") {
        segments_ok = false;
        break;
      }
    }
    if (!segments_ok) {
      ++failures;
      ++m_validation_failures;
      handler_ms += cost.handler_ms(0);
      continue;
    }
    try {
      auto content = icn::reassemble(segments[idx]);
      reply.bytes = content.size();
      for (auto& d : engine::decode_tile(content)) {
        if (valid_item(d))
          reply.items.push_back(std::move(d));
        else
          ++failures;
      }
    }
    catch (const std::exception&) {
      ++failures;
      ++m_validation_failures;
    }
    segments[idx].clear();
    handler_ms += cost.handler_ms(reply.items.size());
  }
  if (cost.enabled)
    m_handler.occupy(handler_ms, started);
  return replies;
}

std::vector<geo::TileId>
Frontend::prefilter(const std::vector<geo::TileId>& tiles, const std::string& tid, const std::string& cid,
                    bool* fell_back)
{
  if (fell_back)
    *fell_back = false;
  std::vector<std::string> keys;
  keys.reserve(tiles.size());
  for (const auto& t : tiles)
    keys.push_back(bloom::bloom_key(t, tid, cid));
  auto bits = m_bloom.membership(keys);
  if (!bits) {
    if (fell_back)
      *fell_back = true;
    return tiles;
  }
  std::vector<geo::TileId> out;
  for (std::size_t i = 0; i < tiles.size(); ++i)
    if ((*bits)[i])
      out.push_back(tiles[i]);
  return out;
}

std::vector<engine::TileQuery>
Frontend::subqueries(const std::vector<geo::TileId>& tiles, const std::string& tid, const std::string& cid,
                     const std::optional<geo::TimeInterval>& interval) const
{
  std::vector<engine::TileQuery> out;
  if (!interval) {
    for (const auto& t : tiles)
      out.push_back({t, tid, cid, std::nullopt});
    return out;
  }
  auto periods = tess::temporal_decompose(*interval).periods;
  for (const auto& t : tiles)
    for (const auto& p : periods)
      out.push_back({t, tid, cid, p});
  return out;
}

namespace {

tess::GeoTessellation
tessellate(const RangeQuery& q)
{
  return q.k == 0 ? tess::mst_box(q.bbox) : tess::tessellate_box(q.bbox, q.k);
}

} // namespace

std::vector<Name>
Frontend::decompose(const RangeQuery& q) const
{
  geo::validate(q.bbox);
  std::vector<Name> out;
  for (const auto& s : subqueries(tessellate(q).tiles, q.tid, q.cid, q.interval))
    out.push_back(engine::tile_query_name(s));
  return out;
}

QueryResult
Frontend::range_query(const RangeQuery& q)
{
  geo::validate(q.bbox);
  QueryResult result;
  auto& st = result.stats;

  auto t0 = std::chrono::steady_clock::now();
  auto tess = tessellate(q);
  st.tessellation_ms = ms_since(t0);
  st.tiles = tess.tiles.size();
  st.constraint_respected = tess.constraint_respected;

  auto tiles = tess.tiles;
  if (q.use_bf) {
    t0 = std::chrono::steady_clock::now();
    tiles = prefilter(tiles, q.tid, q.cid, &st.bf_fallback);
    st.bf_ms = ms_since(t0);
  }
  st.tiles_after_bf = tiles.size();

  std::vector<Name> names;
  for (const auto& s : subqueries(tiles, q.tid, q.cid, q.interval))
    names.push_back(engine::tile_query_name(s));
  st.subqueries = names.size();

  t0 = std::chrono::steady_clock::now();
  if (m_options.cost.enabled)
    sleep_ms(m_options.cost.c3_ms);
  auto parallelism = q.parallelism ? q.parallelism : m_options.parallelism;
  auto replies = fetch_tiles(names, parallelism, st.max_in_flight, st.validation_failures);

  std::map<Name, icn::Data> masters;
  std::set<Name> references;
  for (auto& r : replies) {
    st.items += r.items.size();
    for (auto& d : r.items) {
      try {
        auto p = engine::decode_payload(d.payload);
        if (p.kind == engine::ObjectKind::Master)
          masters.emplace(d.name, std::move(d));
        else
          references.insert(Name::parse(p.body));
      }
      catch (const std::exception&) {
        ++st.validation_failures;
      }
    }
  }
  std::vector<Name> missing;
  for (const auto& r : references)
    if (!masters.contains(r))
      missing.push_back(r);
  st.references_resolved = missing.size();

  std::vector<std::optional<icn::Data>> fetched(missing.size());
  auto issue = [&](std::size_t idx, std::function<void(std::optional<icn::Data>)> done) {
    icn::Interest i;
    i.name = missing[idx];
    i.lifetime = m_options.lifetime;
    m_signer.sign(i);
    auto shared_done = std::make_shared<std::function<void(std::optional<icn::Data>)>>(std::move(done));
    m_face->express_async(
      i, [shared_done](const icn::Data& d) { (*shared_done)(d); }, [shared_done] { (*shared_done)(std::nullopt); },
      m_options.retries);
  };
  Name failed_master;
  auto on_done = [&](std::size_t idx, std::optional<icn::Data>& d) {
    if (!d) {
      failed_master = missing[idx];
      return false;
    }
    fetched[idx] = std::move(d);
    return true;
  };
  std::size_t ignored = 0;
  if (!fan_out<std::optional<icn::Data>>(missing.size(), parallelism, ignored, issue, on_done))
    throw QueryError("master fetch failed for " + failed_master.to_uri(), {failed_master});
  for (auto& d : fetched) {
    if (!valid_item(*d)) {
      ++st.validation_failures;
      continue;
    }
    masters.emplace(d->name, std::move(*d));
  }
  st.batch_ms = ms_since(t0);

  t0 = std::chrono::steady_clock::now();
  std::map<std::string, geo::Feature> selected;
  for (const auto& [name, d] : masters) {
    try {
      auto p = engine::decode_payload(d.payload);
      if (p.kind != engine::ObjectKind::Master)
        continue;
      auto f = geo::parse_feature(p.body);
      if (matches(f, q))
        selected.emplace(f.oid, std::move(f));
    }
    catch (const std::exception&) {
      ++st.validation_failures;
    }
  }
  for (auto& [oid, f] : selected)
    result.objects.push_back(std::move(f));
  st.postfilter_ms = ms_since(t0);
  return result;
}

std::string
Frontend::resolve(const geo::TileId& tile, bool* exchanged)
{
  auto l0 = level0_of(tile);
  if (exchanged)
    *exchanged = false;
  {
    std::lock_guard lock(m_resolve_mutex);
    auto it = m_resolved.find(l0);
    if (it != m_resolved.end() && it->second.second > std::chrono::steady_clock::now())
      return it->second.first;
  }
  icn::Interest i;
  i.name = engine::ip_res_name(l0);
  i.lifetime = m_options.lifetime;
  icn::Data d;
  try {
    d = m_face->express(i, m_options.retries);
  }
  catch (const icn::TimeoutError&) {
    throw InsertError("IP-RES timeout for " + i.name.to_uri());
  }
  auto cert = m_validator->validate(d);
  if (!cert || cert->kl_name.size() < 2 || cert->kl_name[1] != "OGB")
    throw InsertError("IP-RES reply failed validation for " + i.name.to_uri());
  if (exchanged)
    *exchanged = true;
  auto endpoint = ogb::to_string(d.payload);
  std::lock_guard lock(m_resolve_mutex);
  m_resolved[l0] = {endpoint, std::chrono::steady_clock::now() + d.freshness};
  return endpoint;
}

InsertReport
Frontend::insert(const std::string& geojson)
{
  geo::Feature f;
  try {
    f = geo::parse_feature(geojson);
  }
  catch (const geo::GeoError& e) {
    throw InsertError(std::string("invalid feature: ") + e.what());
  }
  return insert(std::vector<geo::Feature>{f});
}

InsertReport
Frontend::insert(const std::vector<geo::Feature>& features)
{
  InsertReport report;
  std::map<geo::TileId, std::vector<icn::Data>> by_tile;
  for (const auto& f : features) {
    std::vector<icn::Data> objects;
    try {
      objects = engine::make_objects(f, m_options.object_freshness);
    }
    catch (const std::exception& e) {
      throw InsertError("feature " + f.oid + ": " + e.what());
    }
    for (auto& d : objects) {
      m_signer.sign(d);
      auto tile = engine::parse_data_name(d.name).tile;
      ++report.objects;
      by_tile[level0_of(tile)].push_back(std::move(d));
    }
    ++report.masters;
  }
  std::map<std::string, std::vector<icn::Data>> by_endpoint;
  for (auto& [tile, objects] : by_tile) {
    bool exchanged = false;
    auto endpoint = resolve(tile, &exchanged);
    report.ip_res_exchanges += exchanged;
    auto& dst = by_endpoint[endpoint];
    std::move(objects.begin(), objects.end(), std::back_inserter(dst));
  }
  for (const auto& [endpoint, objects] : by_endpoint) {
    std::vector<engine::InsertStatus> statuses;
    try {
      statuses = engine::bulk_insert(endpoint, objects);
    }
    catch (const std::exception& e) {
      throw InsertError("bulk insert to " + endpoint + " failed: " + e.what());
    }
    ++report.pushes;
    for (std::size_t i = 0; i < objects.size(); ++i)
      if (statuses[i] != engine::InsertStatus::Ok)
        report.rejected.emplace_back(objects[i].name, statuses[i]);
  }
  return report;
}

DeleteReport
Frontend::remove(const geo::Feature& f)
{
  std::vector<Name> names;
  for (int level = 0; level < geo::kLevels; ++level)
    for (const auto& t : geo::intersecting_tiles(f.geometry, level))
      names.push_back(engine::delete_name({t, f.tid, f.cid, f.uid, f.oid}));

  DeleteReport report;
  report.dinterests = names.size();
  std::vector<std::optional<engine::DeleteStatus>> statuses(names.size());
  auto issue = [&](std::size_t idx, std::function<void(std::optional<icn::Data>)> done) {
    icn::Interest i;
    i.name = names[idx];
    i.lifetime = m_options.lifetime;
    m_signer.sign(i);
    auto shared_done = std::make_shared<std::function<void(std::optional<icn::Data>)>>(std::move(done));
    m_face->express_async(
      i, [shared_done](const icn::Data& d) { (*shared_done)(d); }, [shared_done] { (*shared_done)(std::nullopt); },
      m_options.retries);
  };
  auto on_done = [&](std::size_t idx, std::optional<icn::Data>& d) {
    if (d && d->payload.size() == 1 && m_validator->validate(*d))
      statuses[idx] = static_cast<engine::DeleteStatus>(d->payload[0]);
    return true;
  };
  std::size_t ignored = 0;
  fan_out<std::optional<icn::Data>>(names.size(), m_options.parallelism, ignored, issue, on_done);

  bool any_denied = false;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (statuses[i] == engine::DeleteStatus::Ok)
      continue;
    any_denied |= statuses[i] == engine::DeleteStatus::Denied;
    report.per_tile.emplace_back(names[i], statuses[i]);
  }
  if (report.per_tile.empty())
    report.status = engine::DeleteStatus::Ok;
  else if (any_denied)
    report.status = engine::DeleteStatus::Denied;
  else
    report.status = engine::DeleteStatus::NotFound;
  return report;
}

BatchResult
Frontend::tile_batch(const std::vector<engine::TileQuery>& queries, std::size_t parallelism)
{
  std::vector<Name> names;
  names.reserve(queries.size());
  for (const auto& q : queries)
    names.push_back(engine::tile_query_name(q));
  BatchResult out;
  auto t0 = std::chrono::steady_clock::now();
  if (m_options.cost.enabled)
    sleep_ms(m_options.cost.c3_ms);
  auto replies = fetch_tiles(names, parallelism, out.max_in_flight, out.validation_failures);
  out.duration_ms = ms_since(t0);
  for (const auto& r : replies) {
    out.items += r.items.size();
    out.bytes += r.bytes;
  }
  return out;
}

std::vector<Name>
split_or_query(const std::string& sid, const std::string& did, const std::string& conditions)
{
  std::vector<Name> out;
  std::size_t pos = 0;
  auto trim = [](std::string s) {
    auto b = s.find_first_not_of(' ');
    auto e = s.find_last_not_of(' ');
    return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
  };
  while (pos <= conditions.size()) {
    auto next = conditions.find(" OR ", pos);
    auto part = trim(conditions.substr(pos, next == std::string::npos ? std::string::npos : next - pos));
    if (!part.empty())
      out.push_back(Name{sid, did, part});
    if (next == std::string::npos)
      break;
    pos = next + 4;
  }
  return out;
}

bool
matches(const geo::Feature& f, const RangeQuery& q)
{
  if (f.tid != q.tid || f.cid != q.cid)
    return false;
  bool spatial = q.mode == Mode::Intersect ? geo::intersects(f.geometry, q.bbox) : geo::within(f.geometry, q.bbox);
  if (!spatial)
    return false;
  if (q.interval)
    return f.valid_time && geo::overlaps(*f.valid_time, *q.interval);
  return true;
}

} // namespace ogb::frontend
