#pragma once

#include "ogb/icn/face.hpp"

#include <optional>

namespace ogb::icn {

class SocketError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

inline constexpr std::size_t kMaxFrameSize = 64 * 1024 * 1024;

/// Incremental decoder for u32 big-endian length-prefixed frames.
class FrameDecoder
{
public:
  /// Appends bytes and returns every frame completed by them.
  std::vector<Bytes>
  feed(ByteSpan chunk);

  std::size_t buffered() const { return m_buffer.size() - m_offset; }

private:
  Bytes m_buffer;
  std::size_t m_offset = 0;
};

Bytes
frame(ByteSpan payload);

void
write_all(int fd, ByteSpan data);

void
write_frame(int fd, ByteSpan payload);

/// Blocking read of one frame; nullopt on orderly EOF before a header.
std::optional<Bytes>
read_frame(int fd);

/// Connects to host:port; throws SocketError.
int
connect_tcp(const std::string& host, std::uint16_t port);

/// Splits "host:port".
std::pair<std::string, std::uint16_t>
parse_endpoint(const std::string& endpoint);

/// Accepts connections on a background thread. Port 0 picks an ephemeral
/// port, readable from port().
class TcpListener
{
public:
  using AcceptHandler = std::function<void(int fd)>;

  TcpListener(std::uint16_t port, AcceptHandler handler, const std::string& bind_host = "127.0.0.1");
  ~TcpListener();

  TcpListener(const TcpListener&) = delete;
  TcpListener& operator=(const TcpListener&) = delete;

  std::uint16_t port() const { return m_port; }

  void
  stop();

private:
  int m_fd = -1;
  std::uint16_t m_port = 0;
  AcceptHandler m_handler;
  std::atomic<bool> m_stopped{false};
  std::thread m_thread;
};

/// Face over a connected stream socket; each packet travels as one frame.
class TcpFace final : public Face
{
public:
  TcpFace(std::string description, int fd);
  ~TcpFace() override;

  /// Starts the reader thread; call after the receiver is installed.
  void
  start();

  void
  send(const Packet& packet) override;

  void
  close();

  bool closed() const { return m_closed.load(); }

private:
  void
  read_loop();

  int m_fd;
  std::mutex m_write_mutex;
  std::atomic<bool> m_closed{false};
  std::thread m_reader;
};

struct RouteEntry
{
  Name prefix;
  std::string node;
};

/// Reads "prefix node-id" lines; blank lines and '#' comments are skipped.
std::vector<RouteEntry>
load_routes(std::istream& in);

std::vector<RouteEntry>
load_routes_file(const std::string& path);

} // namespace ogb::icn
