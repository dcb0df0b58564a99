#include "ogb/icn/app_face.hpp"

namespace ogb::icn {

std::shared_ptr<AppFace>
AppFace::attach(Forwarder& forwarder, std::string description, AppFaceOptions options)
{
  std::shared_ptr<AppFace> face(new AppFace(forwarder, std::move(description), std::move(options)));
  forwarder.add_face(face);
  return face;
}

AppFace::AppFace(Forwarder& forwarder, std::string description, AppFaceOptions options)
  : Face(std::move(description))
  , m_forwarder(forwarder)
  , m_options(std::move(options))
{
  if (m_options.workers > 0)
    m_workers = std::make_unique<ThreadPool>(m_options.workers);
  m_uplink = std::make_unique<Channel>([this](Packet p) { deliver(std::move(p)); }, m_options.uplink);
  m_downlink = std::make_unique<Channel>(
    [this](Packet p) {
      if (auto* interest = std::get_if<Interest>(&p))
        dispatch_interest(*interest);
      else
        dispatch_data(std::get<Data>(p));
    },
    m_options.downlink);
}

AppFace::~AppFace()
{
  std::lock_guard lock(m_mutex);
  for (auto& [id, p] : m_pending)
    default_scheduler().cancel(p.timer);
  m_pending.clear();
  m_pending_by_name.clear();
}

void
AppFace::close()
{
  {
    std::lock_guard lock(m_mutex);
    if (m_closed)
      return;
    m_closed = true;
    for (auto& [id, p] : m_pending)
      default_scheduler().cancel(p.timer);
    m_pending.clear();
    m_pending_by_name.clear();
    m_filters.clear();
  }
  m_forwarder.remove_face(id());
}

void
AppFace::send(const Packet& packet)
{
  count_sent(packet);
  m_downlink->push(packet);
}

void
AppFace::set_interest_filter(const Name& prefix, InterestHandler handler)
{
  {
    std::lock_guard lock(m_mutex);
    m_filters[prefix] = std::move(handler);
  }
  m_forwarder.add_route(prefix, id());
}

void
AppFace::unset_interest_filter(const Name& prefix)
{
  {
    std::lock_guard lock(m_mutex);
    m_filters.erase(prefix);
  }
  m_forwarder.remove_route(prefix, id());
}

void
AppFace::put(const Data& data)
{
  m_uplink->push(data);
}

void
AppFace::express_async(Interest interest, DataCallback on_data, TimeoutCallback on_timeout,
                       int retries)
{
  if (interest.nonce == 0)
    interest.nonce = random_nonce();
  std::uint64_t id;
  {
    std::unique_lock lock(m_mutex);
    if (m_closed) {
      lock.unlock();
      if (on_timeout)
        on_timeout();
      return;
    }
    id = m_next_pending++;
    m_pending_by_name.emplace(interest.name, id);
    m_pending.emplace(id, Pending{std::move(interest), std::move(on_data), std::move(on_timeout),
                                  std::max(retries, 0)});
  }
  transmit(id);
}

void
AppFace::transmit(std::uint64_t id)
{
  Interest interest;
  {
    std::lock_guard lock(m_mutex);
    auto it = m_pending.find(id);
    if (it == m_pending.end())
      return;
    interest = it->second.interest;
    std::weak_ptr<AppFace> self = weak_from_this();
    it->second.timer = default_scheduler().schedule_after(interest.lifetime, [self, id] {
      if (auto face = self.lock())
        face->on_timer(id);
    });
  }
  m_uplink->push(std::move(interest));
}

void
AppFace::on_timer(std::uint64_t id)
{
  TimeoutCallback timeout;
  {
    std::lock_guard lock(m_mutex);
    auto it = m_pending.find(id);
    if (it == m_pending.end())
      return;
    auto& p = it->second;
    if (p.retries_left > 0) {
      --p.retries_left;
      p.interest.nonce = random_nonce();
    }
    else {
      timeout = std::move(p.on_timeout);
      auto [lo, hi] = m_pending_by_name.equal_range(p.interest.name);
      for (auto n = lo; n != hi; ++n) {
        if (n->second == id) {
          m_pending_by_name.erase(n);
          break;
        }
      }
      m_pending.erase(it);
    }
  }
  if (timeout)
    timeout();
  else
    transmit(id);
}

void
AppFace::dispatch_data(const Data& data)
{
  std::vector<DataCallback> callbacks;
  {
    std::lock_guard lock(m_mutex);
    auto [lo, hi] = m_pending_by_name.equal_range(data.name);
    for (auto n = lo; n != hi; ++n) {
      auto it = m_pending.find(n->second);
      default_scheduler().cancel(it->second.timer);
      callbacks.push_back(std::move(it->second.on_data));
      m_pending.erase(it);
    }
    m_pending_by_name.erase(lo, hi);
  }
  for (auto& cb : callbacks)
    if (cb)
      cb(data);
}

void
AppFace::dispatch_interest(const Interest& interest)
{
  InterestHandler handler;
  {
    std::lock_guard lock(m_mutex);
    for (std::size_t len = interest.name.size() + 1; len-- > 0;) {
      auto it = m_filters.find(interest.name.prefix(len));
      if (it != m_filters.end()) {
        handler = it->second;
        break;
      }
    }
  }
  if (!handler)
    return;
  if (m_workers)
    m_workers->post([handler, interest] { handler(interest); });
  else
    handler(interest);
}

Data
AppFace::express(Interest interest, int retries)
{
  auto promise = std::make_shared<std::promise<Data>>();
  auto future = promise->get_future();
  auto name = interest.name;
  express_async(
    std::move(interest), [promise](const Data& d) { promise->set_value(d); },
    [promise, name] {
      promise->set_exception(std::make_exception_ptr(TimeoutError("timeout: " + name.to_uri())));
    },
    retries);
  return future.get();
}

std::size_t
AppFace::pending_count() const
{
  std::lock_guard lock(m_mutex);
  return m_pending.size();
}

} // namespace ogb::icn
