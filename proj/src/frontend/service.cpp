#include "ogb/frontend/service.hpp"

#include "json.hpp"

#include <sys/socket.h>
#include <unistd.h>

namespace ogb::frontend {

using nlohmann::json;

namespace {

json
stats_json(const QueryStats& s)
{
  return {{"tessellation_ms", s.tessellation_ms}, {"bf_ms", s.bf_ms},
          {"batch_ms", s.batch_ms},               {"postfilter_ms", s.postfilter_ms},
          {"tiles", s.tiles},                     {"tiles_after_bf", s.tiles_after_bf},
          {"subqueries", s.subqueries},           {"items", s.items},
          {"bf_fallback", s.bf_fallback},         {"constraint_respected", s.constraint_respected}};
}

} // namespace

Service::Service(std::map<std::string, std::unique_ptr<Frontend>> frontends, std::uint16_t port,
                 const std::string& host)
  : m_frontends(std::move(frontends))
{
  m_listener = std::make_unique<icn::TcpListener>(
    port,
    [this](int fd) {
      std::lock_guard lock(m_mutex);
      if (m_stopped) {
        ::close(fd);
        return;
      }
      m_fds.push_back(fd);
      m_sessions.emplace_back([this, fd] { serve(fd); });
    },
    host);
}

Service::~Service()
{
  stop();
}

void
Service::stop()
{
  std::vector<std::thread> sessions;
  {
    std::lock_guard lock(m_mutex);
    if (m_stopped)
      return;
    m_stopped = true;
    for (int fd : m_fds)
      ::shutdown(fd, SHUT_RDWR);
    sessions.swap(m_sessions);
  }
  m_listener->stop();
  for (auto& t : sessions)
    t.join();
}

void
Service::serve(int fd)
{
  std::string buffer;
  char chunk[65536];
  for (;;) {
    auto n = ::read(fd, chunk, sizeof chunk);
    if (n <= 0)
      break;
    buffer.append(chunk, static_cast<std::size_t>(n));
    std::size_t nl;
    while ((nl = buffer.find('\n')) != std::string::npos) {
      auto line = buffer.substr(0, nl);
      buffer.erase(0, nl + 1);
      auto reply = handle(line) + "\n";
      try {
        icn::write_all(fd, ByteSpan(reinterpret_cast<const std::uint8_t*>(reply.data()), reply.size()));
      }
      catch (const std::exception&) {
        ::close(fd);
        return;
      }
    }
  }
  ::close(fd);
}

std::string
Service::handle(const std::string& line)
{
  try {
    auto req = json::parse(line);
    auto op = req.at("op").get<std::string>();
    if (op == "users") {
      json users = json::array();
      for (const auto& [h, fe] : m_frontends)
        users.push_back(h);
      return json{{"ok", true}, {"users", users}}.dump();
    }
    auto user = req.at("user").get<std::string>();
    auto it = m_frontends.find(user);
    if (it == m_frontends.end())
      return json{{"ok", false}, {"error", "unknown user " + user}}.dump();
    auto& fe = *it->second;
    auto slash = user.find('/');
    auto colon = user.find(':');
    auto tid = user.substr(0, colon);
    auto cid = user.substr(colon + 1, slash - colon - 1);

    if (op == "insert") {
      std::vector<geo::Feature> features;
      for (const auto& f : req.at("features"))
        features.push_back(geo::parse_feature(f.dump()));
      auto r = fe.insert(features);
      json rejected = json::array();
      for (const auto& [name, status] : r.rejected)
        rejected.push_back({{"name", name.to_uri()}, {"status", engine::to_string(status)}});
      return json{{"ok", r.ok()},         {"objects", r.objects}, {"masters", r.masters},
                  {"pushes", r.pushes},   {"rejected", rejected}}
        .dump();
    }
    if (op == "query") {
      RangeQuery q;
      const auto& b = req.at("bbox");
      q.bbox = {{b.at(0).get<double>(), b.at(1).get<double>()}, {b.at(2).get<double>(), b.at(3).get<double>()}};
      auto mode = req.value("mode", std::string("intersect"));
      if (mode != "intersect" && mode != "include")
        throw std::invalid_argument("mode must be intersect or include");
      q.mode = mode == "include" ? Mode::Include : Mode::Intersect;
      q.tid = tid;
      q.cid = cid;
      q.k = req.value("k", std::size_t{50});
      q.use_bf = req.value("bf", false);
      if (req.contains("interval")) {
        const auto& iv = req["interval"];
        q.interval = geo::TimeInterval{iv.at(0).get<std::int64_t>(), iv.at(1).get<std::int64_t>()};
      }
      auto r = fe.range_query(q);
      json features = json::array();
      for (const auto& f : r.objects)
        features.push_back(json::parse(f.json));
      return json{{"ok", true}, {"features", features}, {"stats", stats_json(r.stats)}}.dump();
    }
    if (op == "delete") {
      auto f = geo::parse_feature(req.at("feature").dump());
      auto r = fe.remove(f);
      return json{{"ok", r.status == engine::DeleteStatus::Ok},
                  {"status", engine::to_string(r.status)},
                  {"dinterests", r.dinterests}}
        .dump();
    }
    return json{{"ok", false}, {"error", "unknown op " + op}}.dump();
  }
  catch (const std::exception& e) {
    return json{{"ok", false}, {"error", e.what()}}.dump();
  }
}

ServiceClient::ServiceClient(const std::string& host, std::uint16_t port)
  : m_fd(icn::connect_tcp(host, port))
{
}

ServiceClient::~ServiceClient()
{
  if (m_fd >= 0)
    ::close(m_fd);
}

std::string
ServiceClient::call(const std::string& request)
{
  auto line = request + "\n";
  icn::write_all(m_fd, ByteSpan(reinterpret_cast<const std::uint8_t*>(line.data()), line.size()));
  char chunk[65536];
  for (;;) {
    if (auto nl = m_buffer.find('\n'); nl != std::string::npos) {
      auto reply = m_buffer.substr(0, nl);
      m_buffer.erase(0, nl + 1);
      return reply;
    }
    auto n = ::read(m_fd, chunk, sizeof chunk);
    if (n <= 0)
      throw icn::SocketError("front-end service closed the connection");
    m_buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

} // namespace ogb::frontend
