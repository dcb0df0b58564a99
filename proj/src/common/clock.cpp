#include "ogb/common/clock.hpp"

#include <thread>

namespace ogb {

std::int64_t
SystemClock::unix_seconds() const
{
  using namespace std::chrono;
  return duration_cast<seconds>(system_clock::now().time_since_epoch()).count();
}

ManualClock::ManualClock(std::int64_t unix_start)
  : m_unix_start(unix_start)
{
}

SteadyTime
ManualClock::now() const
{
  return SteadyTime(std::chrono::nanoseconds(m_offset.load()));
}

std::int64_t
ManualClock::unix_seconds() const
{
  return m_unix_start + m_offset.load() / 1'000'000'000;
}

std::shared_ptr<Clock>
system_clock()
{
  static auto instance = std::make_shared<SystemClock>();
  return instance;
}

void
wait_until(SteadyTime deadline)
{
  std::this_thread::sleep_until(deadline);
}

} // namespace ogb
