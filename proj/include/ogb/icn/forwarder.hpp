#pragma once

#include "ogb/common/clock.hpp"
#include "ogb/icn/face.hpp"

#include <deque>
#include <list>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace ogb::icn {

/// Forwarding Information Base: prefix -> next-hop faces.
class Fib
{
public:
  /// Registering the same (prefix, face) twice is a no-op.
  void
  insert(const Name& prefix, FaceId face);

  void
  erase(const Name& prefix, FaceId face);

  void
  erase_face(FaceId face);

  /// Next hops of the entry with the most matching leading components;
  /// empty when nothing matches.
  std::vector<FaceId>
  longest_prefix_match(const Name& name) const;

  std::size_t size() const { return m_entries.size(); }

private:
  std::map<Name, std::vector<FaceId>> m_entries;
};

/// LRU content store; an entry is served only while arrival + freshness
/// is in the future.
class ContentStore
{
public:
  explicit ContentStore(std::size_t capacity = 1000)
    : m_capacity(capacity)
  {
  }

  void
  insert(const Data& data, SteadyTime arrival);

  std::optional<Data>
  find(const Name& name, SteadyTime now);

  void
  set_capacity(std::size_t capacity);

  void
  clear();

  std::size_t size() const { return m_index.size(); }
  std::size_t capacity() const { return m_capacity; }

private:
  struct Entry
  {
    Data data;
    SteadyTime stale_at;
  };
  using List = std::list<Entry>;

  void
  evict();

  std::size_t m_capacity;
  List m_lru; // front = most recently used
  std::unordered_map<Name, List::iterator> m_index;
};

struct PitEntry
{
  std::set<FaceId> downstream;
  std::vector<std::uint32_t> nonces;
  SteadyTime expiry;
};

struct ForwarderOptions
{
  std::size_t cs_capacity = 1000;
  Millis dead_nonce_lifetime{6000};
};

struct ForwarderCounters
{
  std::uint64_t interests_in = 0;
  std::uint64_t data_in = 0;
  std::uint64_t cs_hits = 0;
  std::uint64_t aggregated = 0;
  std::uint64_t forwarded = 0;
  std::uint64_t no_route = 0;
  std::uint64_t duplicate_nonce = 0;
  std::uint64_t unsolicited = 0;
  std::uint64_t data_out = 0;
};

/// Best-route forwarding engine. Packet processing is serialized by one
/// mutex; packets produced by processing are sent after it is released so
/// faces may re-enter the forwarder from the same call stack.
class Forwarder
{
public:
  Forwarder(std::string name, std::shared_ptr<Clock> clock, ForwarderOptions options = {});
  ~Forwarder();

  Forwarder(const Forwarder&) = delete;
  Forwarder& operator=(const Forwarder&) = delete;

  FaceId
  add_face(std::shared_ptr<Face> face);

  void
  remove_face(FaceId id);

  void
  add_route(const Name& prefix, FaceId face);

  void
  remove_route(const Name& prefix, FaceId face);

  std::vector<FaceId>
  lookup(const Name& name) const;

  void
  set_cache_capacity(std::size_t capacity);

  void
  clear_cache();

  std::size_t
  pit_size() const;

  std::size_t
  cache_size() const;

  ForwarderCounters
  counters() const;

  const std::string& name() const { return m_name; }
  const std::shared_ptr<Clock>& clock() const { return m_clock; }

private:
  using Outgoing = std::vector<std::pair<std::shared_ptr<Face>, Packet>>;

  void
  receive(FaceId face, Packet packet);

  void
  on_interest(FaceId in_face, Interest interest, Outgoing& out);

  void
  on_data(FaceId in_face, Data data, Outgoing& out);

  void
  expire(SteadyTime now);

  bool
  seen_nonce(const Name& name, std::uint32_t nonce) const;

  void
  remember_nonce(const Name& name, std::uint32_t nonce, SteadyTime now);

  std::string m_name;
  std::shared_ptr<Clock> m_clock;
  ForwarderOptions m_options;

  mutable std::mutex m_mutex;
  FaceId m_next_face = 1;
  std::unordered_map<FaceId, std::shared_ptr<Face>> m_faces;
  Fib m_fib;
  std::unordered_map<Name, PitEntry> m_pit;
  ContentStore m_cs;
  std::unordered_set<std::uint64_t> m_dead_nonces;
  std::deque<std::pair<SteadyTime, std::uint64_t>> m_dead_nonce_queue;
  ForwarderCounters m_counters;
};

} // namespace ogb::icn
