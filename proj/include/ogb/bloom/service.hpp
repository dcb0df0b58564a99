#pragma once

#include "ogb/bloom/bloom.hpp"
#include "ogb/icn/app_face.hpp"
#include "ogb/trust/certificate.hpp"

#include <condition_variable>
#include <map>
#include <set>
#include <shared_mutex>
#include <thread>

namespace ogb::bloom {

/// /OGB/BF
icn::Name
service_prefix();

/// /OGB/BF/update/<engine>/<seq>
icn::Name
update_name(const std::string& engine_id, std::uint64_t seq);

struct ServerCounters
{
  std::uint64_t updates_applied = 0;
  std::uint64_t updates_duplicate = 0;
  std::uint64_t updates_rejected = 0;
  std::uint64_t membership_requests = 0;
  std::uint64_t membership_items = 0;
};

/// Global Bloom filter. Each bucket remembers which engines report it set,
/// so a bit clears only when every such engine has reported 1 -> 0.
class BloomServer
{
public:
  /// Updates are accepted only from the listed engine ids, signed under
  /// their engine certificates.
  BloomServer(std::shared_ptr<icn::AppFace> face, BloomParams params, std::shared_ptr<trust::Validator> validator,
              std::set<std::string> engines);
  ~BloomServer();

  /// Applies an update directly; returns false for unknown engines.
  bool
  apply(const std::string& engine_id, const UpdateMessage& m);

  std::vector<bool>
  membership(const std::vector<std::string>& keys) const;

  bool
  bit(std::uint32_t bucket) const;

  std::size_t
  popcount() const;

  ServerCounters
  counters() const;

  const BloomParams& params() const { return m_params; }

private:
  void
  on_update(const icn::Interest& i);

  void
  on_member(const icn::Interest& i);

  std::shared_ptr<icn::AppFace> m_face;
  BloomParams m_params;
  std::shared_ptr<trust::Validator> m_validator;

  mutable std::shared_mutex m_mutex;
  std::map<std::string, std::vector<bool>> m_set_by;
  std::map<std::string, std::uint64_t> m_last_seq;
  std::vector<std::uint16_t> m_refs;
  ServerCounters m_counters;
};

/// Engine side: delivers CBF transitions to the server in order, one
/// message at a time, retrying until acknowledged.
class UpdatePublisher
{
public:
  UpdatePublisher(std::shared_ptr<icn::AppFace> face, trust::Signer signer, std::string engine_id,
                  Millis lifetime = Millis{500});
  ~UpdatePublisher();

  void
  publish(std::vector<Transition> transitions);

  /// Waits until everything published so far is acknowledged.
  bool
  flush(Millis timeout = Millis{10'000});

  std::uint64_t sent() const { return m_sent.load(); }

private:
  void
  run();

  std::shared_ptr<icn::AppFace> m_face;
  trust::Signer m_signer;
  std::string m_engine_id;
  Millis m_lifetime;

  std::mutex m_mutex;
  std::condition_variable m_cv;
  std::vector<Transition> m_queue;
  std::uint64_t m_next_seq = 1;
  bool m_busy = false;
  bool m_stop = false;
  std::atomic<std::uint64_t> m_sent{0};
  std::thread m_thread;
};

/// Front-end side membership queries; nullopt when the server does not answer.
class BloomClient
{
public:
  BloomClient(std::shared_ptr<icn::AppFace> face, Millis lifetime = Millis{1000}, int retries = 1);

  std::optional<std::vector<bool>>
  membership(const std::vector<std::string>& keys) const;

private:
  std::shared_ptr<icn::AppFace> m_face;
  Millis m_lifetime;
  int m_retries;
};

} // namespace ogb::bloom
