#pragma once

#include "ogb/frontend/frontend.hpp"
#include "ogb/icn/tcp.hpp"

#include <map>
#include <thread>

namespace ogb::frontend {

/// Line-delimited JSON access to a set of front-ends, one per user handle
/// ("tid:cid/uid"). Each request line gets exactly one reply line.
///
///   {"op":"insert","user":h,"features":[Feature...]}
///   {"op":"query","user":h,"bbox":[w,s,e,n],"mode":"intersect"|"include",
///    "k":50,"bf":false,"interval":[start,end]}
///   {"op":"delete","user":h,"feature":Feature}
///   {"op":"users"}
class Service
{
public:
  Service(std::map<std::string, std::unique_ptr<Frontend>> frontends, std::uint16_t port,
          const std::string& host = "127.0.0.1");
  ~Service();

  std::uint16_t port() const { return m_listener->port(); }

  /// Handles one request document and returns the reply document.
  std::string
  handle(const std::string& line);

  void
  stop();

private:
  void
  serve(int fd);

  std::map<std::string, std::unique_ptr<Frontend>> m_frontends;
  std::mutex m_mutex;
  std::vector<std::thread> m_sessions;
  std::vector<int> m_fds;
  std::unique_ptr<icn::TcpListener> m_listener;
  bool m_stopped = false;
};

/// Client side: sends one request line and reads one reply line.
class ServiceClient
{
public:
  ServiceClient(const std::string& host, std::uint16_t port);
  ~ServiceClient();

  ServiceClient(const ServiceClient&) = delete;
  ServiceClient& operator=(const ServiceClient&) = delete;

  std::string
  call(const std::string& request);

private:
  int m_fd = -1;
  std::string m_buffer;
};

} // namespace ogb::frontend
