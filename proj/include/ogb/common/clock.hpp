#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <memory>

namespace ogb {

using Millis = std::chrono::milliseconds;
using SteadyTime = std::chrono::steady_clock::time_point;

/// Injectable time source. Forwarders take PIT/CS time from here and the
/// trust layer reads certificate validity from unix_seconds().
class Clock
{
public:
  virtual ~Clock() = default;
  virtual SteadyTime now() const = 0;
  virtual std::int64_t unix_seconds() const = 0;
};

class SystemClock final : public Clock
{
public:
  SteadyTime now() const override { return std::chrono::steady_clock::now(); }
  std::int64_t unix_seconds() const override;
};

/// Manually advanced clock for deterministic expiry tests.
class ManualClock final : public Clock
{
public:
  explicit ManualClock(std::int64_t unix_start = 1'500'000'000);

  SteadyTime now() const override;
  std::int64_t unix_seconds() const override;
  void advance(std::chrono::nanoseconds d) { m_offset.fetch_add(d.count()); }

private:
  std::int64_t m_unix_start;
  std::atomic<std::int64_t> m_offset{0};
};

std::shared_ptr<Clock>
system_clock();

/// Sleeps until the deadline. Used to emulate a processing cost without
/// burning CPU so concurrent emulated servers overlap on a single core.
void
wait_until(SteadyTime deadline);

} // namespace ogb
