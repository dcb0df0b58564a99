#include "ogb/bloom/service.hpp"

#include <sodium.h>

#include <future>

namespace ogb::bloom {

using icn::Name;

Name
service_prefix()
{
  return Name{"OGB", "BF"};
}

Name
update_name(const std::string& engine_id, std::uint64_t seq)
{
  return service_prefix().appended("update").appended(engine_id).appended(std::to_string(seq));
}

BloomServer::BloomServer(std::shared_ptr<icn::AppFace> face, BloomParams params,
                         std::shared_ptr<trust::Validator> validator, std::set<std::string> engines)
  : m_face(std::move(face))
  , m_params(params)
  , m_validator(std::move(validator))
  , m_refs(params.m, 0)
{
  for (const auto& e : engines) {
    m_set_by.emplace(e, std::vector<bool>(params.m, false));
    m_last_seq.emplace(e, 0);
  }
  if (!m_face)
    return;
  m_face->set_interest_filter(service_prefix().appended("update"), [this](const icn::Interest& i) { on_update(i); });
  m_face->set_interest_filter(service_prefix().appended("member"), [this](const icn::Interest& i) { on_member(i); });
}

BloomServer::~BloomServer()
{
  if (m_face) {
    m_face->unset_interest_filter(service_prefix().appended("update"));
    m_face->unset_interest_filter(service_prefix().appended("member"));
  }
}

bool
BloomServer::apply(const std::string& engine_id, const UpdateMessage& m)
{
  std::unique_lock lock(m_mutex);
  auto it = m_set_by.find(engine_id);
  if (it == m_set_by.end()) {
    ++m_counters.updates_rejected;
    return false;
  }
  auto& last = m_last_seq[engine_id];
  if (m.seq != 0 && m.seq <= last) {
    ++m_counters.updates_duplicate;
    return true;
  }
  for (const auto& t : m.transitions) {
    if (t.bucket >= m_params.m)
      continue;
    auto ref = it->second[t.bucket];
    if (t.up && !ref) {
      it->second[t.bucket] = true;
      ++m_refs[t.bucket];
    }
    else if (!t.up && ref) {
      it->second[t.bucket] = false;
      --m_refs[t.bucket];
    }
  }
  if (m.seq != 0)
    last = m.seq;
  ++m_counters.updates_applied;
  return true;
}

std::vector<bool>
BloomServer::membership(const std::vector<std::string>& keys) const
{
  std::shared_lock lock(m_mutex);
  std::vector<bool> out;
  out.reserve(keys.size());
  for (const auto& k : keys) {
    bool all = true;
    for (auto b : buckets(m_params, k)) {
      if (m_refs[b] == 0) {
        all = false;
        break;
      }
    }
    out.push_back(all);
  }
  return out;
}

bool
BloomServer::bit(std::uint32_t bucket) const
{
  std::shared_lock lock(m_mutex);
  return m_refs.at(bucket) > 0;
}

std::size_t
BloomServer::popcount() const
{
  std::shared_lock lock(m_mutex);
  std::size_t n = 0;
  for (auto r : m_refs)
    n += r > 0;
  return n;
}

ServerCounters
BloomServer::counters() const
{
  std::shared_lock lock(m_mutex);
  return m_counters;
}

void
BloomServer::on_update(const icn::Interest& i)
{
  // /OGB/BF/update/<engine>/<seq>
  const auto& n = i.name;
  if (n.size() != 5) {
    std::unique_lock lock(m_mutex);
    ++m_counters.updates_rejected;
    return;
  }
  auto cert = m_validator ? m_validator->validate(i) : std::nullopt;
  if (!cert || cert->kl_name != trust::engine_cert_name(n[3])) {
    std::unique_lock lock(m_mutex);
    ++m_counters.updates_rejected;
    return;
  }
  UpdateMessage m;
  try {
    m = decode_update(i.parameters);
  }
  catch (const std::exception&) {
    std::unique_lock lock(m_mutex);
    ++m_counters.updates_rejected;
    return;
  }
  if (std::to_string(m.seq) != n[4] || !apply(n[3], m))
    return;
  icn::Data ack;
  ack.name = n;
  m_face->put(ack);
}

void
BloomServer::on_member(const icn::Interest& i)
{
  std::vector<std::string> keys;
  try {
    keys = decode_keys(i.parameters);
  }
  catch (const std::exception&) {
    return;
  }
  {
    std::unique_lock lock(m_mutex);
    ++m_counters.membership_requests;
    m_counters.membership_items += keys.size();
  }
  icn::Data d;
  d.name = i.name;
  d.payload = encode_bits(membership(keys));
  m_face->put(d);
}

UpdatePublisher::UpdatePublisher(std::shared_ptr<icn::AppFace> face, trust::Signer signer, std::string engine_id,
                                 Millis lifetime)
  : m_face(std::move(face))
  , m_signer(std::move(signer))
  , m_engine_id(std::move(engine_id))
  , m_lifetime(lifetime)
  , m_thread([this] { run(); })
{
}

UpdatePublisher::~UpdatePublisher()
{
  {
    std::lock_guard lock(m_mutex);
    m_stop = true;
  }
  m_cv.notify_all();
  m_thread.join();
}

void
UpdatePublisher::publish(std::vector<Transition> transitions)
{
  if (transitions.empty())
    return;
  {
    std::lock_guard lock(m_mutex);
    m_queue.insert(m_queue.end(), transitions.begin(), transitions.end());
  }
  m_cv.notify_all();
}

bool
UpdatePublisher::flush(Millis timeout)
{
  std::unique_lock lock(m_mutex);
  return m_cv.wait_for(lock, timeout, [this] { return m_queue.empty() && !m_busy; });
}

void
UpdatePublisher::run()
{
  std::unique_lock lock(m_mutex);
  while (true) {
    m_cv.wait(lock, [this] { return m_stop || !m_queue.empty(); });
    if (m_stop)
      return;
    UpdateMessage m;
    m.seq = m_next_seq++;
    m.transitions.swap(m_queue);
    m_busy = true;
    lock.unlock();

    icn::Interest i;
    i.name = update_name(m_engine_id, m.seq);
    i.parameters = encode(m);
    i.lifetime = m_lifetime;
    m_signer.sign(i);
    bool acked = false;
    while (!acked) {
      try {
        m_face->express(i, 0);
        acked = true;
        ++m_sent;
      }
      catch (const icn::TimeoutError&) {
        std::lock_guard stop_lock(m_mutex);
        if (m_stop)
          break;
      }
    }

    lock.lock();
    m_busy = false;
    m_cv.notify_all();
  }
}

BloomClient::BloomClient(std::shared_ptr<icn::AppFace> face, Millis lifetime, int retries)
  : m_face(std::move(face))
  , m_lifetime(lifetime)
  , m_retries(retries)
{
}

std::optional<std::vector<bool>>
BloomClient::membership(const std::vector<std::string>& keys) const
{
  std::vector<std::pair<std::size_t, std::future<icn::Data>>> calls;
  for (std::size_t begin = 0; begin < keys.size(); begin += kMaxBatch) {
    std::vector<std::string> batch(keys.begin() + begin, keys.begin() + std::min(keys.size(), begin + kMaxBatch));
    icn::Interest i;
    i.parameters = encode_keys(batch);
    unsigned char digest[16];
    crypto_generichash(digest, sizeof digest, i.parameters.data(), i.parameters.size(), nullptr, 0);
    i.name = service_prefix().appended("member").appended(to_hex(ByteSpan(digest, sizeof digest)));
    i.lifetime = m_lifetime;
    auto promise = std::make_shared<std::promise<icn::Data>>();
    calls.emplace_back(batch.size(), promise->get_future());
    m_face->express_async(
      i, [promise](const icn::Data& d) { promise->set_value(d); },
      [promise] { promise->set_exception(std::make_exception_ptr(icn::TimeoutError("bloom membership"))); },
      m_retries);
  }
  std::vector<bool> out;
  out.reserve(keys.size());
  for (auto& [count, fut] : calls) {
    try {
      auto bits = decode_bits(fut.get().payload, count);
      out.insert(out.end(), bits.begin(), bits.end());
    }
    catch (const std::exception&) {
      return std::nullopt;
    }
  }
  return out;
}

} // namespace ogb::bloom
