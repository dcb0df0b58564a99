#include "ogb/icn/tcp.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <fstream>
#include <sstream>

namespace ogb::icn {

namespace {

std::uint32_t
read_u32(const std::uint8_t* p)
{
  return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | p[3];
}

bool
read_exact(int fd, std::uint8_t* buf, std::size_t n)
{
  std::size_t got = 0;
  while (got < n) {
    auto r = ::recv(fd, buf + got, n - got, 0);
    if (r == 0) {
      if (got == 0)
        return false;
      throw SocketError("connection closed mid-frame");
    }
    if (r < 0) {
      if (errno == EINTR)
        continue;
      throw SocketError(std::string("recv: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return true;
}

} // namespace

std::vector<Bytes>
FrameDecoder::feed(ByteSpan chunk)
{
  m_buffer.insert(m_buffer.end(), chunk.begin(), chunk.end());
  std::vector<Bytes> out;
  while (m_buffer.size() - m_offset >= 4) {
    auto len = read_u32(m_buffer.data() + m_offset);
    if (len > kMaxFrameSize)
      throw DecodeError("frame too large: " + std::to_string(len));
    if (m_buffer.size() - m_offset - 4 < len)
      break;
    auto begin = m_buffer.begin() + static_cast<std::ptrdiff_t>(m_offset + 4);
    out.emplace_back(begin, begin + len);
    m_offset += 4 + len;
  }
  if (m_offset > 0 && m_offset * 2 >= m_buffer.size()) {
    m_buffer.erase(m_buffer.begin(), m_buffer.begin() + static_cast<std::ptrdiff_t>(m_offset));
    m_offset = 0;
  }
  return out;
}

Bytes
frame(ByteSpan payload)
{
  BufferWriter w;
  w.u32(static_cast<std::uint32_t>(payload.size()));
  w.raw(payload);
  return std::move(w).take();
}

void
write_all(int fd, ByteSpan data)
{
  std::size_t sent = 0;
  while (sent < data.size()) {
    auto r = ::send(fd, data.data() + sent, data.size() - sent, MSG_NOSIGNAL);
    if (r < 0) {
      if (errno == EINTR)
        continue;
      throw SocketError(std::string("send: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(r);
  }
}

void
write_frame(int fd, ByteSpan payload)
{
  write_all(fd, frame(payload));
}

std::optional<Bytes>
read_frame(int fd)
{
  std::uint8_t header[4];
  if (!read_exact(fd, header, 4))
    return std::nullopt;
  auto len = read_u32(header);
  if (len > kMaxFrameSize)
    throw DecodeError("frame too large: " + std::to_string(len));
  Bytes body(len);
  if (len > 0 && !read_exact(fd, body.data(), len))
    throw SocketError("connection closed mid-frame");
  return body;
}

std::pair<std::string, std::uint16_t>
parse_endpoint(const std::string& endpoint)
{
  auto colon = endpoint.rfind(':');
  if (colon == std::string::npos)
    throw SocketError("endpoint without port: " + endpoint);
  int port = 0;
  try {
    port = std::stoi(endpoint.substr(colon + 1));
  }
  catch (const std::exception&) {
    throw SocketError("bad port in endpoint: " + endpoint);
  }
  if (port <= 0 || port > 65535)
    throw SocketError("bad port in endpoint: " + endpoint);
  return {endpoint.substr(0, colon), static_cast<std::uint16_t>(port)};
}

int
connect_tcp(const std::string& host, std::uint16_t port)
{
  addrinfo hints{};
  hints.ai_family = AF_UNSPEC;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  auto service = std::to_string(port);
  if (int rc = ::getaddrinfo(host.c_str(), service.c_str(), &hints, &res); rc != 0)
    throw SocketError("resolve " + host + ": " + ::gai_strerror(rc));
  int fd = -1;
  for (auto* ai = res; ai; ai = ai->ai_next) {
    fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
    if (fd < 0)
      continue;
    if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0)
      break;
    ::close(fd);
    fd = -1;
  }
  ::freeaddrinfo(res);
  if (fd < 0)
    throw SocketError("connect " + host + ":" + service + " failed");
  int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  return fd;
}

TcpListener::TcpListener(std::uint16_t port, AcceptHandler handler, const std::string& bind_host)
  : m_handler(std::move(handler))
{
  m_fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (m_fd < 0)
    throw SocketError(std::string("socket: ") + std::strerror(errno));
  int one = 1;
  ::setsockopt(m_fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (::inet_pton(AF_INET, bind_host.c_str(), &addr.sin_addr) != 1) {
    ::close(m_fd);
    throw SocketError("bad bind address: " + bind_host);
  }
  if (::bind(m_fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0 || ::listen(m_fd, 64) < 0) {
    auto err = std::string(std::strerror(errno));
    ::close(m_fd);
    throw SocketError("bind/listen on port " + std::to_string(port) + ": " + err);
  }
  socklen_t len = sizeof(addr);
  ::getsockname(m_fd, reinterpret_cast<sockaddr*>(&addr), &len);
  m_port = ntohs(addr.sin_port);

  m_thread = std::thread([this] {
    while (!m_stopped) {
      int fd = ::accept(m_fd, nullptr, nullptr);
      if (fd < 0) {
        if (errno == EINTR)
          continue;
        return;
      }
      if (m_stopped) {
        ::close(fd);
        return;
      }
      int one = 1;
      ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
      m_handler(fd);
    }
  });
}

TcpListener::~TcpListener()
{
  stop();
}

void
TcpListener::stop()
{
  if (m_stopped.exchange(true))
    return;
  ::shutdown(m_fd, SHUT_RDWR);
  ::close(m_fd);
  if (m_thread.joinable())
    m_thread.join();
}

TcpFace::TcpFace(std::string description, int fd)
  : Face(std::move(description))
  , m_fd(fd)
{
}

TcpFace::~TcpFace()
{
  close();
  if (m_reader.joinable())
    m_reader.join();
  ::close(m_fd);
}

void
TcpFace::start()
{
  m_reader = std::thread([this] { read_loop(); });
}

void
TcpFace::send(const Packet& packet)
{
  if (m_closed)
    return;
  count_sent(packet);
  auto wire = frame(encode(packet));
  std::lock_guard lock(m_write_mutex);
  try {
    write_all(m_fd, wire);
  }
  catch (const SocketError&) {
    close();
  }
}

void
TcpFace::close()
{
  if (!m_closed.exchange(true))
    ::shutdown(m_fd, SHUT_RDWR);
}

void
TcpFace::read_loop()
{
  FrameDecoder decoder;
  std::uint8_t buf[64 * 1024];
  while (!m_closed) {
    auto r = ::recv(m_fd, buf, sizeof(buf), 0);
    if (r < 0 && errno == EINTR)
      continue;
    if (r <= 0)
      break;
    try {
      for (auto& f : decoder.feed(ByteSpan(buf, static_cast<std::size_t>(r))))
        deliver(decode(f));
    }
    catch (const DecodeError&) {
      break;
    }
  }
  m_closed = true;
}

std::vector<RouteEntry>
load_routes(std::istream& in)
{
  std::vector<RouteEntry> routes;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ss(line);
    std::string prefix, node, extra;
    if (!(ss >> prefix))
      continue;
    if (!(ss >> node) || (ss >> extra))
      throw std::runtime_error("routes line " + std::to_string(lineno) + ": expected '<prefix> <node>'");
    routes.push_back({Name::parse(prefix), node});
  }
  return routes;
}

std::vector<RouteEntry>
load_routes_file(const std::string& path)
{
  std::ifstream in(path);
  if (!in)
    throw std::runtime_error("cannot open routes file " + path);
  return load_routes(in);
}

} // namespace ogb::icn
