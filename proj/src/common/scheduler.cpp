#include "ogb/common/scheduler.hpp"

namespace ogb {

Scheduler::Scheduler()
  : m_thread([this] { run(); })
{
}

Scheduler::~Scheduler()
{
  {
    std::lock_guard lock(m_mutex);
    m_stop = true;
  }
  m_cv.notify_all();
  m_thread.join();
}

Scheduler::EventId
Scheduler::schedule(SteadyTime when, std::function<void()> fn)
{
  EventId id;
  {
    std::lock_guard lock(m_mutex);
    id = m_next++;
    m_events.emplace(id, std::make_pair(when, std::move(fn)));
    m_queue.emplace(when, id);
  }
  m_cv.notify_all();
  return id;
}

bool
Scheduler::cancel(EventId id)
{
  std::lock_guard lock(m_mutex);
  auto it = m_events.find(id);
  if (it == m_events.end())
    return false;
  auto [lo, hi] = m_queue.equal_range(it->second.first);
  for (auto q = lo; q != hi; ++q) {
    if (q->second == id) {
      m_queue.erase(q);
      break;
    }
  }
  m_events.erase(it);
  return true;
}

void
Scheduler::run()
{
  std::unique_lock lock(m_mutex);
  while (!m_stop) {
    if (m_queue.empty()) {
      m_cv.wait(lock);
      continue;
    }
    auto when = m_queue.begin()->first;
    if (std::chrono::steady_clock::now() < when) {
      m_cv.wait_until(lock, when);
      continue;
    }
    auto id = m_queue.begin()->second;
    m_queue.erase(m_queue.begin());
    auto node = m_events.extract(id);
    lock.unlock();
    if (!node.empty())
      node.mapped().second();
    lock.lock();
  }
}

Scheduler&
default_scheduler()
{
  static Scheduler instance;
  return instance;
}

} // namespace ogb
