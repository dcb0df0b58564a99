#pragma once

#include "ogb/common/clock.hpp"

#include <mutex>

namespace ogb {

/// Emulated tile-query processing cost: TQ = c1 + c2 * items, split into an
/// engine share p_db and a query-handler share 1 - p_db; c3 is charged once
/// per tile-query batch by the query handler.
struct CostModel
{
  bool enabled = false;
  double c1_ms = 3.0;
  double c2_ms = 0.008;
  double c3_ms = 20.0;
  double p_db = 0.85;

  double
  tq_ms(std::size_t items) const
  {
    return c1_ms + c2_ms * static_cast<double>(items);
  }

  double engine_ms(std::size_t items) const { return p_db * tq_ms(items); }
  double handler_ms(std::size_t items) const { return (1.0 - p_db) * tq_ms(items); }
};

/// A single emulated server: work items occupy it back to back, so callers
/// on different threads are served one at a time while sleeping, not spinning.
class SerialTimeline
{
public:
  /// Reserves the next `ms` of the server and returns when that slot ends.
  void
  occupy(double ms)
  {
    occupy(ms, std::chrono::steady_clock::now());
  }

  /// As above for work that began at `started`: real processing since then
  /// counts toward the slot.
  void
  occupy(double ms, SteadyTime started)
  {
    if (ms <= 0)
      return;
    auto cost = std::chrono::duration_cast<SteadyTime::duration>(std::chrono::duration<double, std::milli>(ms));
    SteadyTime deadline;
    {
      std::lock_guard lock(m_mutex);
      m_busy_until = std::max(m_busy_until, started) + cost;
      deadline = m_busy_until;
    }
    wait_until(deadline);
  }

private:
  std::mutex m_mutex;
  SteadyTime m_busy_until{};
};

} // namespace ogb
