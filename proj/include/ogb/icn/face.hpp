#pragma once

#include "ogb/icn/packet.hpp"

#include <atomic>
#include <condition_variable>
#include <deque>
#include <functional>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>

namespace ogb::icn {

using FaceId = std::uint64_t;
inline constexpr FaceId kInvalidFaceId = 0;

struct ChannelOptions
{
  /// Serialization rate of the channel in bits/s; 0 delivers inline.
  double bandwidth_bps = 0;
  /// Returns true for packets the channel should lose.
  std::function<bool(const Packet&)> drop;
};

/// Delivers packets to a sink, optionally through a rate-limited queue with
/// its own delivery thread so transmission time overlaps with the sender.
class Channel
{
public:
  using Sink = std::function<void(Packet)>;

  Channel(Sink sink, ChannelOptions options);
  ~Channel();

  Channel(const Channel&) = delete;
  Channel& operator=(const Channel&) = delete;

  void
  push(Packet packet);

  std::uint64_t dropped() const { return m_dropped.load(); }
  std::uint64_t bytes() const { return m_bytes.load(); }

private:
  void
  run();

  Sink m_sink;
  ChannelOptions m_options;
  std::atomic<std::uint64_t> m_dropped{0};
  std::atomic<std::uint64_t> m_bytes{0};

  std::mutex m_mutex;
  std::condition_variable m_cv;
  std::deque<Packet> m_queue;
  bool m_stop = false;
  std::thread m_thread;
};

/// A forwarder-side attachment point. The forwarder calls send() for
/// packets leaving through the face; whatever sits on the other side calls
/// deliver() to hand packets to the forwarder.
class Face
{
public:
  using Receiver = std::function<void(Packet)>;

  explicit Face(std::string description)
    : m_description(std::move(description))
  {
  }

  virtual ~Face() = default;

  Face(const Face&) = delete;
  Face& operator=(const Face&) = delete;

  virtual void
  send(const Packet& packet) = 0;

  void
  deliver(Packet packet);

  void
  set_receiver(Receiver receiver);

  FaceId id() const { return m_id; }
  void set_id(FaceId id) { m_id = id; }
  const std::string& description() const { return m_description; }

  std::uint64_t sent_interests() const { return m_out_interests.load(); }
  std::uint64_t sent_data() const { return m_out_data.load(); }
  std::uint64_t received_interests() const { return m_in_interests.load(); }
  std::uint64_t received_data() const { return m_in_data.load(); }

protected:
  void
  count_sent(const Packet& packet);

private:
  std::string m_description;
  FaceId m_id = kInvalidFaceId;

  std::mutex m_receiver_mutex;
  Receiver m_receiver;

  std::atomic<std::uint64_t> m_out_interests{0};
  std::atomic<std::uint64_t> m_out_data{0};
  std::atomic<std::uint64_t> m_in_interests{0};
  std::atomic<std::uint64_t> m_in_data{0};
};

/// Face whose outgoing packets go to an arbitrary callback.
class CallbackFace final : public Face
{
public:
  using Handler = std::function<void(Packet)>;

  CallbackFace(std::string description, Handler handler, ChannelOptions options = {});

  void
  send(const Packet& packet) override;

private:
  Channel m_channel;
};

/// Creates two connected faces (one per forwarder). Each direction has its
/// own channel configured by the corresponding options.
std::pair<std::shared_ptr<Face>, std::shared_ptr<Face>>
make_link(const std::string& description, ChannelOptions a_to_b = {}, ChannelOptions b_to_a = {});

} // namespace ogb::icn
