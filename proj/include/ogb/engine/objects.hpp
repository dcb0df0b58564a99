#pragma once

#include "ogb/geo/feature.hpp"
#include "ogb/icn/packet.hpp"
#include "ogb/tess/geo_tess.hpp"

#include <optional>
#include <string>

namespace ogb::engine {

class FormatError : public std::runtime_error
{
public:
  using std::runtime_error::runtime_error;
};

enum class ObjectKind : std::uint8_t { Master = 1, Reference = 2 };

/// Payload of an OGB-Data: [kind u8][has_interval u8][start i64][end i64][body].
/// The body is the GeoJSON for a master and the master name URI for a
/// reference.
struct ObjectPayload
{
  ObjectKind kind = ObjectKind::Master;
  std::optional<geo::TimeInterval> valid_time;
  std::string body;
};

Bytes
encode_payload(const ObjectPayload& p);

ObjectPayload
decode_payload(ByteSpan wire);

/// ndn:/tile-prefix/DATA/tid/cid/uid/oid
struct DataName
{
  geo::TileId tile;
  std::string tid;
  std::string cid;
  std::string uid;
  std::string oid;

  friend bool operator==(const DataName&, const DataName&) = default;
};

icn::Name
data_name(const DataName& d);

DataName
parse_data_name(const icn::Name& n);

/// data name + /DELETE
icn::Name
delete_name(const DataName& d);

/// ndn:/tile-prefix/TILE/tid/cid[/T/{size-minutes}/{start-minute}]
struct TileQuery
{
  geo::TileId tile;
  std::string tid;
  std::string cid;
  std::optional<tess::Period> period;

  friend bool operator==(const TileQuery&, const TileQuery&) = default;
};

icn::Name
tile_query_name(const TileQuery& q);

/// Accepts an optional trailing seg=N component, which is returned.
TileQuery
parse_tile_query(const icn::Name& n, std::optional<std::uint32_t>* segment = nullptr);

/// ndn:/tile-prefix/IP-RES
icn::Name
ip_res_name(const geo::TileId& tile);

/// OGB-Tile content: [count u32] then count length-prefixed OGB-Data wires.
Bytes
encode_tile(const std::vector<Bytes>& data_wires);

std::vector<icn::Data>
decode_tile(ByteSpan wire);

/// The OGB-Data items of a feature: one per intersecting tile at every
/// level; the master sits at the smallest level-2 tile prefix, every other
/// item references it. Unsigned.
std::vector<icn::Data>
make_objects(const geo::Feature& f, Millis freshness = Millis{10'000});

/// Name of the master item of a feature.
icn::Name
master_name(const geo::Feature& f);

/// Bulk-insert per-object status codes.
enum class InsertStatus : std::uint8_t {
  Ok = 0,
  BadSignature = 1,
  Denied = 2,
  Duplicate = 3,
  Malformed = 4,
  NotOwner = 5,
};

std::string
to_string(InsertStatus s);

/// Status payload of a delete reply.
enum class DeleteStatus : std::uint8_t {
  Ok = 0,
  NotFound = 1,
  Denied = 2,
  Malformed = 3,
};

std::string
to_string(DeleteStatus s);

} // namespace ogb::engine
