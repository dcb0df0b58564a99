#include "ogb/icn/forwarder.hpp"

#include <algorithm>

namespace ogb::icn {

void
Fib::insert(const Name& prefix, FaceId face)
{
  auto& hops = m_entries[prefix];
  if (std::find(hops.begin(), hops.end(), face) == hops.end())
    hops.push_back(face);
}

void
Fib::erase(const Name& prefix, FaceId face)
{
  auto it = m_entries.find(prefix);
  if (it == m_entries.end())
    return;
  std::erase(it->second, face);
  if (it->second.empty())
    m_entries.erase(it);
}

void
Fib::erase_face(FaceId face)
{
  for (auto it = m_entries.begin(); it != m_entries.end();) {
    std::erase(it->second, face);
    if (it->second.empty())
      it = m_entries.erase(it);
    else
      ++it;
  }
}

std::vector<FaceId>
Fib::longest_prefix_match(const Name& name) const
{
  for (std::size_t len = name.size() + 1; len-- > 0;) {
    auto it = m_entries.find(name.prefix(len));
    if (it != m_entries.end())
      return it->second;
  }
  return {};
}

void
ContentStore::insert(const Data& data, SteadyTime arrival)
{
  if (m_capacity == 0 || data.freshness.count() <= 0)
    return;
  auto stale_at = arrival + data.freshness;
  if (auto it = m_index.find(data.name); it != m_index.end()) {
    it->second->data = data;
    it->second->stale_at = stale_at;
    m_lru.splice(m_lru.begin(), m_lru, it->second);
    return;
  }
  m_lru.push_front(Entry{data, stale_at});
  m_index.emplace(data.name, m_lru.begin());
  evict();
}

std::optional<Data>
ContentStore::find(const Name& name, SteadyTime now)
{
  auto it = m_index.find(name);
  if (it == m_index.end())
    return std::nullopt;
  if (it->second->stale_at <= now) {
    m_lru.erase(it->second);
    m_index.erase(it);
    return std::nullopt;
  }
  m_lru.splice(m_lru.begin(), m_lru, it->second);
  return it->second->data;
}

void
ContentStore::set_capacity(std::size_t capacity)
{
  m_capacity = capacity;
  evict();
}

void
ContentStore::clear()
{
  m_lru.clear();
  m_index.clear();
}

void
ContentStore::evict()
{
  while (m_index.size() > m_capacity) {
    m_index.erase(m_lru.back().data.name);
    m_lru.pop_back();
  }
}

Forwarder::Forwarder(std::string name, std::shared_ptr<Clock> clock, ForwarderOptions options)
  : m_name(std::move(name))
  , m_clock(std::move(clock))
  , m_options(options)
  , m_cs(options.cs_capacity)
{
}

Forwarder::~Forwarder()
{
  std::lock_guard lock(m_mutex);
  for (auto& [id, face] : m_faces)
    face->set_receiver(nullptr);
}

FaceId
Forwarder::add_face(std::shared_ptr<Face> face)
{
  std::lock_guard lock(m_mutex);
  FaceId id = m_next_face++;
  face->set_id(id);
  face->set_receiver([this, id](Packet p) { receive(id, std::move(p)); });
  m_faces.emplace(id, std::move(face));
  return id;
}

void
Forwarder::remove_face(FaceId id)
{
  std::shared_ptr<Face> face;
  {
    std::lock_guard lock(m_mutex);
    auto it = m_faces.find(id);
    if (it == m_faces.end())
      return;
    face = it->second;
    m_faces.erase(it);
    m_fib.erase_face(id);
    for (auto pit = m_pit.begin(); pit != m_pit.end();) {
      pit->second.downstream.erase(id);
      if (pit->second.downstream.empty())
        pit = m_pit.erase(pit);
      else
        ++pit;
    }
  }
  face->set_receiver(nullptr);
}

void
Forwarder::add_route(const Name& prefix, FaceId face)
{
  std::lock_guard lock(m_mutex);
  m_fib.insert(prefix, face);
}

void
Forwarder::remove_route(const Name& prefix, FaceId face)
{
  std::lock_guard lock(m_mutex);
  m_fib.erase(prefix, face);
}

std::vector<FaceId>
Forwarder::lookup(const Name& name) const
{
  std::lock_guard lock(m_mutex);
  return m_fib.longest_prefix_match(name);
}

void
Forwarder::set_cache_capacity(std::size_t capacity)
{
  std::lock_guard lock(m_mutex);
  m_cs.set_capacity(capacity);
}

void
Forwarder::clear_cache()
{
  std::lock_guard lock(m_mutex);
  m_cs.clear();
}

std::size_t
Forwarder::pit_size() const
{
  std::lock_guard lock(m_mutex);
  return m_pit.size();
}

std::size_t
Forwarder::cache_size() const
{
  std::lock_guard lock(m_mutex);
  return m_cs.size();
}

ForwarderCounters
Forwarder::counters() const
{
  std::lock_guard lock(m_mutex);
  return m_counters;
}

void
Forwarder::receive(FaceId face, Packet packet)
{
  Outgoing out;
  {
    std::lock_guard lock(m_mutex);
    if (!m_faces.contains(face))
      return;
    expire(m_clock->now());
    if (auto* interest = std::get_if<Interest>(&packet))
      on_interest(face, std::move(*interest), out);
    else
      on_data(face, std::move(std::get<Data>(packet)), out);
  }
  for (auto& [f, p] : out)
    f->send(p);
}

void
Forwarder::on_interest(FaceId in_face, Interest interest, Outgoing& out)
{
  ++m_counters.interests_in;
  auto now = m_clock->now();

  auto pit = m_pit.find(interest.name);
  bool nonce_in_pit = pit != m_pit.end() &&
                      std::find(pit->second.nonces.begin(), pit->second.nonces.end(),
                                interest.nonce) != pit->second.nonces.end();
  if (nonce_in_pit || seen_nonce(interest.name, interest.nonce)) {
    ++m_counters.duplicate_nonce;
    return;
  }

  if (auto cached = m_cs.find(interest.name, now)) {
    ++m_counters.cs_hits;
    ++m_counters.data_out;
    out.emplace_back(m_faces.at(in_face), std::move(*cached));
    return;
  }

  auto expiry = now + interest.lifetime;
  if (pit != m_pit.end()) {
    auto& entry = pit->second;
    bool retransmission = entry.downstream.contains(in_face);
    entry.downstream.insert(in_face);
    entry.nonces.push_back(interest.nonce);
    entry.expiry = std::max(entry.expiry, expiry);
    if (!retransmission) {
      ++m_counters.aggregated;
      return;
    }
  }

  auto hops = m_fib.longest_prefix_match(interest.name);
  auto hop = std::find_if(hops.begin(), hops.end(), [&](FaceId f) { return f != in_face; });
  if (hop == hops.end()) {
    ++m_counters.no_route;
    if (pit != m_pit.end() && pit->second.downstream.size() == 1)
      m_pit.erase(pit);
    return;
  }

  if (pit == m_pit.end()) {
    PitEntry entry;
    entry.downstream.insert(in_face);
    entry.nonces.push_back(interest.nonce);
    entry.expiry = expiry;
    m_pit.emplace(interest.name, std::move(entry));
  }
  ++m_counters.forwarded;
  out.emplace_back(m_faces.at(*hop), std::move(interest));
}

void
Forwarder::on_data(FaceId in_face, Data data, Outgoing& out)
{
  ++m_counters.data_in;
  auto now = m_clock->now();

  auto pit = m_pit.find(data.name);
  if (pit == m_pit.end()) {
    ++m_counters.unsolicited;
    return;
  }
  auto entry = std::move(pit->second);
  m_pit.erase(pit);
  for (auto nonce : entry.nonces)
    remember_nonce(data.name, nonce, now);

  m_cs.insert(data, now);

  for (auto face : entry.downstream) {
    if (face == in_face)
      continue;
    auto it = m_faces.find(face);
    if (it == m_faces.end())
      continue;
    ++m_counters.data_out;
    out.emplace_back(it->second, data);
  }
}

void
Forwarder::expire(SteadyTime now)
{
  std::erase_if(m_pit, [now](const auto& kv) { return kv.second.expiry <= now; });
  while (!m_dead_nonce_queue.empty() && m_dead_nonce_queue.front().first <= now) {
    m_dead_nonces.erase(m_dead_nonce_queue.front().second);
    m_dead_nonce_queue.pop_front();
  }
}

static std::uint64_t
nonce_key(const Name& name, std::uint32_t nonce)
{
  return std::hash<Name>{}(name) * 0x100000001b3ULL ^ nonce;
}

bool
Forwarder::seen_nonce(const Name& name, std::uint32_t nonce) const
{
  return m_dead_nonces.contains(nonce_key(name, nonce));
}

void
Forwarder::remember_nonce(const Name& name, std::uint32_t nonce, SteadyTime now)
{
  auto key = nonce_key(name, nonce);
  if (m_dead_nonces.insert(key).second)
    m_dead_nonce_queue.emplace_back(now + m_options.dead_nonce_lifetime, key);
}

} // namespace ogb::icn
