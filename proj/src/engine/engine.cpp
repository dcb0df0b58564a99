#include "ogb/engine/engine.hpp"

#include <fstream>
#include <sys/socket.h>
#include <unistd.h>

namespace ogb::engine {

using icn::Name;

namespace {

constexpr std::uint8_t kSnapInsert = 1;
constexpr std::uint8_t kSnapDelete = 2;

std::optional<std::size_t>
gps_marker(const Name& n)
{
  if (n.empty() || n[0] != "OGB")
    return std::nullopt;
  for (std::size_t i = 3; i < n.size() && i <= 3 + geo::kLevels; ++i)
    if (n[i] == "GPS-ID")
      return i;
  return std::nullopt;
}

geo::TileId
level0_of(geo::TileId t)
{
  while (t.level > 0)
    t = geo::parent(t);
  return t;
}

/// Structural checks of an OGB-Data item, without signature or access.
InsertStatus
parse_object(const icn::Data& d, StoredObject& out)
{
  try {
    out.name = parse_data_name(d.name);
    auto p = decode_payload(d.payload);
    out.kind = p.kind;
    out.valid_time = p.valid_time;
    if (p.kind == ObjectKind::Reference) {
      auto master = parse_data_name(Name::parse(p.body));
      if (master.tid != out.name.tid || master.cid != out.name.cid || master.uid != out.name.uid ||
          master.oid != out.name.oid || master.tile.level != geo::kLevels - 1)
        return InsertStatus::Malformed;
    }
    else {
      if (out.name.tile.level != geo::kLevels - 1)
        return InsertStatus::Malformed;
      auto f = geo::parse_feature(p.body);
      if (f.oid != out.name.oid || f.tid != out.name.tid || f.cid != out.name.cid || f.uid != out.name.uid)
        return InsertStatus::Malformed;
    }
  }
  catch (const std::exception&) {
    return InsertStatus::Malformed;
  }
  out.data = d;
  out.wire = icn::encode(d);
  return InsertStatus::Ok;
}

} // namespace

Engine::Engine(icn::Forwarder& forwarder, trust::Identity identity, std::shared_ptr<trust::Validator> validator,
               EngineOptions options)
  : m_forwarder(forwarder)
  , m_identity(std::move(identity))
  , m_signer(m_identity.signer())
  , m_validator(std::move(validator))
  , m_options(std::move(options))
  , m_cbf(m_options.bloom)
  , m_cost(m_options.cost)
{
  for (const auto& t : m_options.owned) {
    if (t.level != 0)
      throw std::invalid_argument("engine owns level-0 tiles only");
    m_owned.insert(t);
  }
  if (m_options.advertise_host.empty())
    m_options.advertise_host = m_options.bind_host;
}

Engine::~Engine()
{
  stop();
}

void
Engine::start()
{
  if (m_running)
    return;
  replay_snapshot();
  m_face = icn::AppFace::attach(m_forwarder, "engine:" + m_options.id, {m_options.workers, {}, {}});
  for (const auto& t : m_owned)
    m_face->set_interest_filter(geo::routing_prefix(t), [this](const icn::Interest& i) { on_interest(i); });
  if (m_options.publish_bloom) {
    m_publisher = std::make_unique<bloom::UpdatePublisher>(m_face, m_signer, m_options.id);
    // buckets restored from the snapshot
    std::vector<bloom::Transition> restored;
    std::shared_lock lock(m_state);
    for (std::uint32_t b = 0; b < m_cbf.params().m; ++b)
      if (m_cbf.count(b) > 0)
        restored.push_back({b, true});
    m_publisher->publish(std::move(restored));
  }
  m_listener = std::make_unique<icn::TcpListener>(
    m_options.bulk_port, [this](int fd) { on_bulk_connection(fd); }, m_options.bind_host);
  m_running = true;
}

void
Engine::stop()
{
  if (!m_running)
    return;
  m_running = false;
  m_listener->stop();
  std::vector<std::thread> threads;
  {
    std::lock_guard lock(m_conn_mutex);
    for (int fd : m_conn_fds)
      ::shutdown(fd, SHUT_RDWR);
    threads.swap(m_conn_threads);
  }
  for (auto& t : threads)
    t.join();
  m_publisher.reset();
  m_face->close();
}

std::string
Engine::endpoint() const
{
  return m_options.advertise_host + ":" + std::to_string(m_listener ? m_listener->port() : 0);
}

bool
Engine::owns(const geo::TileId& tile) const
{
  return m_owned.contains(level0_of(tile));
}

InsertStatus
Engine::check(const icn::Data& d, StoredObject& out) const
{
  auto status = parse_object(d, out);
  if (status != InsertStatus::Ok)
    return status;
  if (!owns(out.name.tile))
    return InsertStatus::NotOwner;
  auto cert = m_validator->validate(d);
  if (!cert)
    return InsertStatus::BadSignature;
  if (!trust::check_access(trust::Operation::Insert, d.name, cert->kl_name))
    return InsertStatus::Denied;
  return InsertStatus::Ok;
}

std::vector<InsertStatus>
Engine::insert(const std::vector<icn::Data>& objects)
{
  std::vector<InsertStatus> out;
  out.reserve(objects.size());
  for (const auto& d : objects) {
    StoredObject obj;
    auto status = check(d, obj);
    if (status == InsertStatus::Ok) {
      std::unique_lock lock(m_state);
      if (m_objects.contains(d.name)) {
        status = InsertStatus::Duplicate;
      }
      else {
        append_snapshot(kSnapInsert, obj.wire);
        commit(std::move(obj));
      }
    }
    out.push_back(status);
    std::lock_guard lock(m_counter_mutex);
    if (status == InsertStatus::Ok)
      ++m_counters.inserted;
    else
      ++m_counters.rejected;
  }
  return out;
}

void
Engine::commit(StoredObject obj)
{
  TileKey key{obj.name.tile, obj.name.tid, obj.name.cid};
  auto& rows = m_tables[obj.name.tile.level][key];
  bool was_void = rows.empty();
  rows.insert(obj.data.name);
  auto name = obj.data.name;
  m_objects.emplace(name, std::move(obj));
  ++m_write_epoch;
  invalidate(key);
  if (was_void) {
    auto t = m_cbf.insert(bloom::bloom_key(key.tile, key.tid, key.cid));
    if (m_publisher)
      m_publisher->publish(std::move(t));
  }
}

void
Engine::erase(const Name& name)
{
  auto it = m_objects.find(name);
  if (it == m_objects.end())
    return;
  TileKey key{it->second.name.tile, it->second.name.tid, it->second.name.cid};
  auto& table = m_tables[key.tile.level];
  auto rows = table.find(key);
  rows->second.erase(name);
  bool now_void = rows->second.empty();
  if (now_void)
    table.erase(rows);
  m_objects.erase(it);
  ++m_write_epoch;
  invalidate(key);
  if (now_void) {
    auto t = m_cbf.remove(bloom::bloom_key(key.tile, key.tid, key.cid));
    if (m_publisher)
      m_publisher->publish(std::move(t));
  }
}

void
Engine::invalidate(const TileKey& key)
{
  std::lock_guard lock(m_cache_mutex);
  auto it = m_cache_index.find(key);
  if (it == m_cache_index.end())
    return;
  for (const auto& qname : it->second) {
    auto c = m_cache.find(qname);
    if (c != m_cache.end()) {
      m_lru.erase(c->second->lru);
      m_cache.erase(c);
    }
  }
  m_cache_index.erase(it);
}

DeleteStatus
Engine::remove(const icn::Interest& interest)
{
  const auto& n = interest.name;
  if (n.empty() || n.back() != "DELETE")
    return DeleteStatus::Malformed;
  auto target = n.prefix(n.size() - 1);
  try {
    parse_data_name(target);
  }
  catch (const FormatError&) {
    return DeleteStatus::Malformed;
  }
  auto cert = m_validator->validate(interest);
  if (!cert || !trust::check_access(trust::Operation::Delete, n, cert->kl_name)) {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.denied;
    return DeleteStatus::Denied;
  }
  std::unique_lock lock(m_state);
  if (!m_objects.contains(target))
    return DeleteStatus::NotFound;
  append_snapshot(kSnapDelete, to_bytes(target.to_uri()));
  erase(target);
  std::lock_guard counter_lock(m_counter_mutex);
  ++m_counters.deleted;
  return DeleteStatus::Ok;
}

std::vector<Name>
Engine::select_names(const geo::TileId& tile, const std::string& tid, const std::string& cid) const
{
  std::shared_lock lock(m_state);
  auto& table = m_tables.at(tile.level);
  auto it = table.find(TileKey{tile, tid, cid});
  if (it == table.end())
    return {};
  return {it->second.begin(), it->second.end()};
}

std::vector<const StoredObject*>
Engine::lookup(const TileQuery& q) const
{
  {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.index_lookups;
  }
  std::vector<const StoredObject*> out;
  auto& table = m_tables.at(q.tile.level);
  auto it = table.find(TileKey{q.tile, q.tid, q.cid});
  if (it == table.end())
    return out;
  std::optional<geo::TimeInterval> window;
  if (q.period)
    window = geo::TimeInterval{q.period->start_seconds(), q.period->end_seconds()};
  for (const auto& name : it->second) {
    const auto& obj = m_objects.at(name);
    if (window && (!obj.valid_time || !geo::overlaps(*obj.valid_time, *window)))
      continue;
    out.push_back(&obj);
  }
  return out;
}

Bytes
Engine::tile_content(const TileQuery& q) const
{
  std::shared_lock lock(m_state);
  std::vector<Bytes> wires;
  for (const auto* o : lookup(q))
    wires.push_back(o->wire);
  return encode_tile(wires);
}

std::optional<StoredObject>
Engine::object(const Name& name) const
{
  std::shared_lock lock(m_state);
  auto it = m_objects.find(name);
  if (it == m_objects.end())
    return std::nullopt;
  return it->second;
}

std::size_t
Engine::object_count() const
{
  std::shared_lock lock(m_state);
  return m_objects.size();
}

std::size_t
Engine::master_count() const
{
  std::shared_lock lock(m_state);
  std::size_t n = 0;
  for (const auto& [name, o] : m_objects)
    n += o.kind == ObjectKind::Master;
  return n;
}

std::size_t
Engine::level_rows(int level) const
{
  std::shared_lock lock(m_state);
  std::size_t n = 0;
  for (const auto& [key, rows] : m_tables.at(level))
    n += rows.size();
  return n;
}

std::shared_ptr<const Engine::CachedTile>
Engine::reply_for(const TileQuery& q, bool& hit)
{
  auto qname = tile_query_name(q);
  {
    std::lock_guard lock(m_cache_mutex);
    auto it = m_cache.find(qname);
    if (it != m_cache.end()) {
      m_lru.splice(m_lru.begin(), m_lru, it->second->lru);
      hit = true;
      return it->second;
    }
  }
  hit = false;
  auto started = std::chrono::steady_clock::now();
  auto entry = std::make_shared<CachedTile>();
  std::uint64_t epoch = 0;
  Bytes content;
  {
    std::shared_lock lock(m_state);
    epoch = m_write_epoch;
    std::vector<Bytes> wires;
    for (const auto* o : lookup(q))
      wires.push_back(o->wire);
    entry->items = wires.size();
    content = encode_tile(wires);
  }
  entry->segments = icn::segment(qname, content, m_options.max_segment_payload, m_options.tile_freshness);
  for (auto& s : entry->segments)
    m_signer.sign(s);

  CostModel cost;
  {
    std::lock_guard lock(m_cost_mutex);
    cost = m_cost;
  }
  if (cost.enabled)
    m_db.occupy(cost.engine_ms(entry->items), started);

  std::shared_lock state_lock(m_state);
  if (epoch != m_write_epoch)
    return entry;
  std::lock_guard lock(m_cache_mutex);
  if (m_cache.contains(qname))
    return entry;
  m_lru.push_front(qname);
  entry->lru = m_lru.begin();
  m_cache.emplace(qname, entry);
  m_cache_index[TileKey{q.tile, q.tid, q.cid}].insert(qname);
  while (m_cache.size() > m_options.qdata_capacity) {
    auto victim = m_lru.back();
    m_lru.pop_back();
    auto v = m_cache.find(victim);
    auto vq = parse_tile_query(victim);
    auto idx = m_cache_index.find(TileKey{vq.tile, vq.tid, vq.cid});
    if (idx != m_cache_index.end()) {
      idx->second.erase(victim);
      if (idx->second.empty())
        m_cache_index.erase(idx);
    }
    m_cache.erase(v);
  }
  return entry;
}

void
Engine::prewarm(const std::vector<TileQuery>& queries)
{
  CostModel saved;
  {
    std::lock_guard lock(m_cost_mutex);
    saved = m_cost;
    m_cost.enabled = false;
  }
  for (const auto& q : queries) {
    bool hit = false;
    reply_for(q, hit);
  }
  std::lock_guard lock(m_cost_mutex);
  m_cost = saved;
}

void
Engine::clear_qdata_cache()
{
  std::lock_guard lock(m_cache_mutex);
  m_cache.clear();
  m_cache_index.clear();
  m_lru.clear();
}

std::size_t
Engine::qdata_cache_size() const
{
  std::lock_guard lock(m_cache_mutex);
  return m_cache.size();
}

bool
Engine::bloom_contains(const std::string& key) const
{
  std::shared_lock lock(m_state);
  return m_cbf.contains(key);
}

bool
Engine::flush_bloom(Millis timeout)
{
  return !m_publisher || m_publisher->flush(timeout);
}

void
Engine::set_cost(const CostModel& cost)
{
  std::lock_guard lock(m_cost_mutex);
  m_cost = cost;
}

EngineCounters
Engine::counters() const
{
  std::lock_guard lock(m_counter_mutex);
  return m_counters;
}

void
Engine::on_interest(const icn::Interest& i)
{
  auto marker = gps_marker(i.name);
  if (!marker || *marker + 1 >= i.name.size()) {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.malformed;
    return;
  }
  const auto& kind = i.name[*marker + 1];
  if (kind == "TILE")
    on_tile_query(i);
  else if (kind == "DATA" && i.name.back() == "DELETE")
    on_delete(i);
  else if (kind == "DATA")
    on_object_fetch(i);
  else if (kind == "IP-RES")
    on_ip_res(i);
  else {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.malformed;
  }
}

void
Engine::on_tile_query(const icn::Interest& i)
{
  TileQuery q;
  std::optional<std::uint32_t> seg;
  try {
    q = parse_tile_query(i.name, &seg);
  }
  catch (const FormatError&) {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.malformed;
    return;
  }
  if (!owns(q.tile))
    return;
  auto cert = m_validator->validate(i);
  if (!cert || !trust::check_access(trust::Operation::Query, i.name, cert->kl_name)) {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.denied;
    return;
  }
  bool hit = false;
  auto reply = reply_for(q, hit);
  {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.tile_queries;
    ++(hit ? m_counters.cache_hits : m_counters.cache_misses);
  }
  auto index = seg.value_or(0);
  if (index < reply->segments.size())
    m_face->put(reply->segments[index]);
}

void
Engine::on_object_fetch(const icn::Interest& i)
{
  DataName dn;
  try {
    dn = parse_data_name(i.name);
  }
  catch (const FormatError&) {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.malformed;
    return;
  }
  auto cert = m_validator->validate(i);
  bool allowed = false;
  if (cert) {
    try {
      allowed = trust::check_access(trust::Operation::Query, trust::TargetIds{dn.tid + ":" + dn.cid, std::nullopt},
                                    trust::parse_key_locator(cert->kl_name))
                  .allow;
    }
    catch (const trust::TrustError&) {
    }
  }
  if (!allowed) {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.denied;
    return;
  }
  auto obj = object(i.name);
  if (!obj)
    return;
  {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.object_fetches;
  }
  m_face->put(obj->data);
}

void
Engine::on_ip_res(const icn::Interest& i)
{
  geo::TileId tile;
  try {
    tile = geo::parse_tile_prefix(i.name.prefix(i.name.size() - 1));
  }
  catch (const geo::GeoError&) {
    return;
  }
  if (!owns(tile) || i.name.size() != geo::tile_prefix_size(tile.level) + 1)
    return;
  icn::Data d;
  d.name = i.name;
  d.payload = to_bytes(endpoint());
  d.freshness = m_options.ip_res_freshness;
  m_signer.sign(d);
  {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.ip_res;
  }
  m_face->put(d);
}

void
Engine::on_delete(const icn::Interest& i)
{
  auto status = remove(i);
  if (status == DeleteStatus::Malformed) {
    std::lock_guard lock(m_counter_mutex);
    ++m_counters.malformed;
  }
  icn::Data d;
  d.name = i.name;
  d.payload = Bytes{static_cast<std::uint8_t>(status)};
  m_signer.sign(d);
  m_face->put(d);
}

void
Engine::on_bulk_connection(int fd)
{
  std::lock_guard lock(m_conn_mutex);
  if (!m_running) {
    ::close(fd);
    return;
  }
  m_conn_fds.insert(fd);
  m_conn_threads.emplace_back([this, fd] {
    try {
      while (auto header = icn::read_frame(fd)) {
        BufferReader r(*header);
        auto count = r.u32();
        r.expect_end();
        std::vector<InsertStatus> statuses(count, InsertStatus::Malformed);
        std::vector<icn::Data> objects;
        std::vector<std::size_t> slots;
        for (std::uint32_t k = 0; k < count; ++k) {
          auto f = icn::read_frame(fd);
          if (!f)
            throw icn::SocketError("bulk insert: truncated batch");
          try {
            objects.push_back(icn::decode_data(*f));
            slots.push_back(k);
          }
          catch (const std::exception&) {
          }
        }
        auto results = insert(objects);
        for (std::size_t k = 0; k < slots.size(); ++k)
          statuses[slots[k]] = results[k];
        Bytes reply(count);
        for (std::uint32_t k = 0; k < count; ++k)
          reply[k] = static_cast<std::uint8_t>(statuses[k]);
        icn::write_frame(fd, reply);
      }
    }
    catch (const std::exception&) {
    }
    std::lock_guard inner(m_conn_mutex);
    m_conn_fds.erase(fd);
    ::close(fd);
  });
}

void
Engine::append_snapshot(std::uint8_t op, ByteSpan wire)
{
  if (m_options.snapshot_path.empty())
    return;
  std::lock_guard lock(m_snapshot_mutex);
  std::ofstream out(m_options.snapshot_path, std::ios::binary | std::ios::app);
  Bytes record{op};
  record.insert(record.end(), wire.begin(), wire.end());
  auto f = icn::frame(record);
  out.write(reinterpret_cast<const char*>(f.data()), static_cast<std::streamsize>(f.size()));
}

void
Engine::replay_snapshot()
{
  if (m_options.snapshot_path.empty())
    return;
  std::ifstream in(m_options.snapshot_path, std::ios::binary);
  if (!in)
    return;
  Bytes content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  icn::FrameDecoder decoder;
  std::unique_lock lock(m_state);
  for (const auto& record : decoder.feed(content)) {
    if (record.empty())
      continue;
    ByteSpan body(record.data() + 1, record.size() - 1);
    if (record[0] == kSnapInsert) {
      StoredObject obj;
      auto d = icn::decode_data(body);
      if (parse_object(d, obj) == InsertStatus::Ok && !m_objects.contains(d.name))
        commit(std::move(obj));
    }
    else if (record[0] == kSnapDelete) {
      erase(Name::parse(ogb::to_string(body)));
    }
  }
}

std::vector<InsertStatus>
bulk_insert(const std::string& endpoint, const std::vector<icn::Data>& objects)
{
  auto [host, port] = icn::parse_endpoint(endpoint);
  struct Fd
  {
    int fd;
    ~Fd() { ::close(fd); }
  } conn{icn::connect_tcp(host, port)};

  BufferWriter w;
  w.u32(static_cast<std::uint32_t>(objects.size()));
  Bytes out = icn::frame(std::move(w).take());
  for (const auto& d : objects) {
    auto f = icn::frame(icn::encode(d));
    out.insert(out.end(), f.begin(), f.end());
  }
  icn::write_all(conn.fd, out);
  auto reply = icn::read_frame(conn.fd);
  if (!reply || reply->size() != objects.size())
    throw icn::SocketError("bulk insert: bad reply from " + endpoint);
  std::vector<InsertStatus> statuses;
  for (auto b : *reply)
    statuses.push_back(static_cast<InsertStatus>(b));
  return statuses;
}

} // namespace ogb::engine
