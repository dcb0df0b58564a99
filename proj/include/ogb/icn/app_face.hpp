#pragma once

#include "ogb/common/scheduler.hpp"
#include "ogb/common/thread_pool.hpp"
#include "ogb/icn/face.hpp"
#include "ogb/icn/forwarder.hpp"

#include <future>
#include <map>

namespace ogb::icn {

class TimeoutError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

struct AppFaceOptions
{
  /// Worker threads for Interest handlers; 0 runs handlers on the
  /// delivering thread.
  std::size_t workers = 0;
  /// Shaping of the app -> forwarder and forwarder -> app directions.
  ChannelOptions uplink;
  ChannelOptions downlink;
};

/// Application endpoint attached to a forwarder. Acts as consumer
/// (express) and producer (interest filters + put).
class AppFace : public Face, public std::enable_shared_from_this<AppFace>
{
public:
  using InterestHandler = std::function<void(const Interest&)>;
  using DataCallback = std::function<void(const Data&)>;
  using TimeoutCallback = std::function<void()>;

  static std::shared_ptr<AppFace>
  attach(Forwarder& forwarder, std::string description, AppFaceOptions options = {});

  ~AppFace() override;

  /// Called by the forwarder for packets destined to the application.
  void
  send(const Packet& packet) override;

  /// Handles Interests under prefix and registers the route.
  void
  set_interest_filter(const Name& prefix, InterestHandler handler);

  void
  unset_interest_filter(const Name& prefix);

  /// Injects a Data (producer reply) into the forwarder.
  void
  put(const Data& data);

  /// Sends an Interest; on_timeout fires after `retries` retransmissions,
  /// each waiting one Interest lifetime, all go unanswered.
  void
  express_async(Interest interest, DataCallback on_data, TimeoutCallback on_timeout,
                int retries = 3);

  /// Blocking form of express_async; throws TimeoutError.
  Data
  express(Interest interest, int retries = 3);

  /// Detaches from the forwarder and drops pending Interests silently.
  void
  close();

  Forwarder& forwarder() { return m_forwarder; }

  std::size_t
  pending_count() const;

private:
  AppFace(Forwarder& forwarder, std::string description, AppFaceOptions options);

  struct Pending
  {
    Interest interest;
    DataCallback on_data;
    TimeoutCallback on_timeout;
    int retries_left;
    Scheduler::EventId timer = 0;
  };

  void
  transmit(std::uint64_t id);

  void
  on_timer(std::uint64_t id);

  void
  dispatch_interest(const Interest& interest);

  void
  dispatch_data(const Data& data);

  Forwarder& m_forwarder;
  AppFaceOptions m_options;
  std::unique_ptr<ThreadPool> m_workers;
  std::unique_ptr<Channel> m_uplink;
  std::unique_ptr<Channel> m_downlink;

  mutable std::mutex m_mutex;
  std::map<Name, InterestHandler> m_filters;
  std::map<std::uint64_t, Pending> m_pending;
  std::multimap<Name, std::uint64_t> m_pending_by_name;
  std::uint64_t m_next_pending = 1;
  bool m_closed = false;
};

} // namespace ogb::icn
