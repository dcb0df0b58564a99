#include "ogb/icn/face.hpp"

namespace ogb::icn {

Channel::Channel(Sink sink, ChannelOptions options)
  : m_sink(std::move(sink))
  , m_options(std::move(options))
{
  if (m_options.bandwidth_bps > 0)
    m_thread = std::thread([this] { run(); });
}

Channel::~Channel()
{
  if (m_thread.joinable()) {
    {
      std::lock_guard lock(m_mutex);
      m_stop = true;
    }
    m_cv.notify_all();
    m_thread.join();
  }
}

void
Channel::push(Packet packet)
{
  if (m_options.drop && m_options.drop(packet)) {
    ++m_dropped;
    return;
  }
  if (!m_thread.joinable()) {
    m_sink(std::move(packet));
    return;
  }
  {
    std::lock_guard lock(m_mutex);
    m_queue.push_back(std::move(packet));
  }
  m_cv.notify_one();
}

void
Channel::run()
{
  using namespace std::chrono;
  auto next_free = steady_clock::now();
  for (;;) {
    Packet packet;
    {
      std::unique_lock lock(m_mutex);
      m_cv.wait(lock, [this] { return m_stop || !m_queue.empty(); });
      if (m_queue.empty())
        return;
      packet = std::move(m_queue.front());
      m_queue.pop_front();
    }
    auto size = std::visit([](const auto& p) { return wire_size(p); }, packet);
    m_bytes += size;
    auto tx = duration<double>(static_cast<double>(size) * 8.0 / m_options.bandwidth_bps);
    next_free = std::max(next_free, steady_clock::now()) + duration_cast<steady_clock::duration>(tx);
    std::this_thread::sleep_until(next_free);
    m_sink(std::move(packet));
  }
}

void
Face::deliver(Packet packet)
{
  if (std::holds_alternative<Interest>(packet))
    ++m_in_interests;
  else
    ++m_in_data;

  Receiver receiver;
  {
    std::lock_guard lock(m_receiver_mutex);
    receiver = m_receiver;
  }
  if (receiver)
    receiver(std::move(packet));
}

void
Face::set_receiver(Receiver receiver)
{
  std::lock_guard lock(m_receiver_mutex);
  m_receiver = std::move(receiver);
}

void
Face::count_sent(const Packet& packet)
{
  if (std::holds_alternative<Interest>(packet))
    ++m_out_interests;
  else
    ++m_out_data;
}

CallbackFace::CallbackFace(std::string description, Handler handler, ChannelOptions options)
  : Face(std::move(description))
  , m_channel(std::move(handler), std::move(options))
{
}

void
CallbackFace::send(const Packet& packet)
{
  count_sent(packet);
  m_channel.push(packet);
}

namespace {

class LinkFace final : public Face
{
public:
  LinkFace(std::string description, ChannelOptions options)
    : Face(std::move(description))
    , m_channel([this](Packet p) { forward(std::move(p)); }, std::move(options))
  {
  }

  void
  connect(std::weak_ptr<Face> peer)
  {
    m_peer = std::move(peer);
  }

  void
  send(const Packet& packet) override
  {
    count_sent(packet);
    m_channel.push(packet);
  }

private:
  void
  forward(Packet packet)
  {
    if (auto peer = m_peer.lock())
      peer->deliver(std::move(packet));
  }

  std::weak_ptr<Face> m_peer;
  Channel m_channel;
};

} // namespace

std::pair<std::shared_ptr<Face>, std::shared_ptr<Face>>
make_link(const std::string& description, ChannelOptions a_to_b, ChannelOptions b_to_a)
{
  auto a = std::make_shared<LinkFace>(description + "/a", std::move(a_to_b));
  auto b = std::make_shared<LinkFace>(description + "/b", std::move(b_to_a));
  a->connect(b);
  b->connect(a);
  return {a, b};
}

} // namespace ogb::icn
