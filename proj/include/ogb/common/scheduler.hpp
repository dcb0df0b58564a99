#pragma once

#include "ogb/common/clock.hpp"

#include <condition_variable>
#include <functional>
#include <map>
#include <mutex>
#include <thread>

namespace ogb {

/// Single-threaded timer queue on the steady clock. Callbacks run on the
/// scheduler thread and must not block for long.
class Scheduler
{
public:
  using EventId = std::uint64_t;

  Scheduler();
  ~Scheduler();

  Scheduler(const Scheduler&) = delete;
  Scheduler& operator=(const Scheduler&) = delete;

  EventId
  schedule(SteadyTime when, std::function<void()> fn);

  EventId
  schedule_after(std::chrono::nanoseconds delay, std::function<void()> fn)
  {
    return schedule(std::chrono::steady_clock::now() + delay, std::move(fn));
  }

  /// Returns false when the event already ran or was never scheduled.
  bool
  cancel(EventId id);

private:
  void
  run();

  std::mutex m_mutex;
  std::condition_variable m_cv;
  std::multimap<SteadyTime, EventId> m_queue;
  std::map<EventId, std::pair<SteadyTime, std::function<void()>>> m_events;
  EventId m_next = 1;
  bool m_stop = false;
  std::thread m_thread;
};

/// Process-wide scheduler shared by consumers.
Scheduler&
default_scheduler();

} // namespace ogb
