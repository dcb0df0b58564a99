#pragma once

#include "ogb/perf/cluster.hpp"

#include <iosfwd>

namespace ogb::perf {

struct UserSpec
{
  std::string tid;
  std::string cid;
  std::string uid;
  bool write = true;

  /// "tid:cid/uid", the handle clients use to pick a front-end.
  std::string handle() const { return tid + ":" + cid + "/" + uid; }
};

/// Parsed cluster file. See README for the schema.
struct ClusterFile
{
  ClusterConfig cluster;
  geo::BBox region{{10, 40}, {14, 44}};
  std::vector<UserSpec> users;
  std::string service_host = "127.0.0.1";
  std::uint16_t service_port = 7070;
  /// GeoJSON files loaded at start-up.
  std::vector<std::string> preload;
};

class ConfigError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

ClusterFile
parse_cluster_file(std::istream& in);

ClusterFile
load_cluster_file(const std::string& path);

} // namespace ogb::perf
