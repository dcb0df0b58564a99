#include "ogb/engine/objects.hpp"

#include "ogb/icn/segment.hpp"

#include <algorithm>
#include <charconv>

namespace ogb::engine {

using icn::Name;

Bytes
encode_payload(const ObjectPayload& p)
{
  BufferWriter w;
  w.u8(static_cast<std::uint8_t>(p.kind));
  w.u8(p.valid_time ? 1 : 0);
  w.i64(p.valid_time ? p.valid_time->start : 0);
  w.i64(p.valid_time ? p.valid_time->end : 0);
  w.raw(to_bytes(p.body));
  return std::move(w).take();
}

ObjectPayload
decode_payload(ByteSpan wire)
{
  if (wire.size() < 18)
    throw FormatError("OGB-Data payload too short");
  BufferReader r(wire);
  ObjectPayload p;
  auto kind = r.u8();
  if (kind != 1 && kind != 2)
    throw FormatError("unknown OGB-Data kind");
  p.kind = static_cast<ObjectKind>(kind);
  bool has = r.u8() != 0;
  auto start = r.i64();
  auto end = r.i64();
  if (has)
    p.valid_time = geo::TimeInterval{start, end};
  auto body = r.raw(r.remaining());
  p.body = ogb::to_string(body);
  return p;
}

namespace {

std::size_t
marker_of(const Name& n)
{
  if (n.size() < 4 || n[0] != "OGB")
    throw FormatError("not an OGB name: " + n.to_uri());
  for (std::size_t i = 3; i < n.size() && i <= 3 + geo::kLevels; ++i)
    if (n[i] == "GPS-ID")
      return i;
  throw FormatError("no GPS-ID marker: " + n.to_uri());
}

geo::TileId
tile_part(const Name& n, std::size_t marker)
{
  try {
    return geo::parse_tile_prefix(n.prefix(marker + 1));
  }
  catch (const geo::GeoError& e) {
    throw FormatError(e.what());
  }
}

std::int64_t
parse_int(const std::string& s)
{
  std::int64_t v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw FormatError("bad integer component " + s);
  return v;
}

} // namespace

Name
data_name(const DataName& d)
{
  return geo::tile_prefix(d.tile).appended("DATA").appended(d.tid).appended(d.cid).appended(d.uid).appended(d.oid);
}

DataName
parse_data_name(const Name& n)
{
  auto m = marker_of(n);
  if (n.size() != m + 6 || n[m + 1] != "DATA")
    throw FormatError("not an OGB-Data name: " + n.to_uri());
  return {tile_part(n, m), n[m + 2], n[m + 3], n[m + 4], n[m + 5]};
}

Name
delete_name(const DataName& d)
{
  return data_name(d).appended("DELETE");
}

Name
tile_query_name(const TileQuery& q)
{
  auto n = geo::tile_prefix(q.tile).appended("TILE").appended(q.tid).appended(q.cid);
  if (q.period)
    n = n.appended("T").appended(std::to_string(q.period->size_minutes)).appended(std::to_string(q.period->start_minute));
  return n;
}

TileQuery
parse_tile_query(const Name& name, std::optional<std::uint32_t>* segment)
{
  Name n = name;
  std::optional<std::uint32_t> seg;
  if (!n.empty() && (seg = icn::parse_segment(n[n.size() - 1])))
    n = n.prefix(n.size() - 1);
  if (segment)
    *segment = seg;
  auto m = marker_of(n);
  std::size_t rest = n.size() - m - 1;
  if ((rest != 3 && rest != 6) || n[m + 1] != "TILE")
    throw FormatError("not a tile-query name: " + name.to_uri());
  TileQuery q{tile_part(n, m), n[m + 2], n[m + 3], std::nullopt};
  if (rest == 6) {
    if (n[m + 4] != "T")
      throw FormatError("malformed period in " + name.to_uri());
    tess::Period p{parse_int(n[m + 5]), parse_int(n[m + 6])};
    if (p.size_minutes <= 0 || p.start_minute % p.size_minutes != 0)
      throw FormatError("unaligned period in " + name.to_uri());
    q.period = p;
  }
  return q;
}

Name
ip_res_name(const geo::TileId& tile)
{
  return geo::tile_prefix(tile).appended("IP-RES");
}

Bytes
encode_tile(const std::vector<Bytes>& data_wires)
{
  BufferWriter w;
  w.u32(static_cast<std::uint32_t>(data_wires.size()));
  for (const auto& d : data_wires)
    w.blob32(d);
  return std::move(w).take();
}

std::vector<icn::Data>
decode_tile(ByteSpan wire)
{
  BufferReader r(wire);
  auto count = r.u32();
  if (count > wire.size() / 4)
    throw FormatError("OGB-Tile count exceeds content");
  std::vector<icn::Data> out;
  out.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i)
    out.push_back(icn::decode_data(r.blob32()));
  r.expect_end();
  return out;
}

namespace {

std::vector<geo::TileId>
level2_tiles_sorted(const geo::Feature& f)
{
  auto tiles = geo::intersecting_tiles(f.geometry, geo::kLevels - 1);
  if (tiles.empty())
    throw FormatError("feature " + f.oid + " intersects no tile");
  std::sort(tiles.begin(), tiles.end(), [](const geo::TileId& a, const geo::TileId& b) {
    return geo::tile_prefix(a).to_uri() < geo::tile_prefix(b).to_uri();
  });
  return tiles;
}

} // namespace

Name
master_name(const geo::Feature& f)
{
  return data_name({level2_tiles_sorted(f).front(), f.tid, f.cid, f.uid, f.oid});
}

std::vector<icn::Data>
make_objects(const geo::Feature& f, Millis freshness)
{
  auto master_tile = level2_tiles_sorted(f).front();
  auto master = data_name({master_tile, f.tid, f.cid, f.uid, f.oid});
  std::vector<icn::Data> out;
  for (int level = 0; level < geo::kLevels; ++level) {
    for (const auto& t : geo::intersecting_tiles(f.geometry, level)) {
      icn::Data d;
      d.name = data_name({t, f.tid, f.cid, f.uid, f.oid});
      ObjectPayload p;
      p.valid_time = f.valid_time;
      if (t == master_tile) {
        p.kind = ObjectKind::Master;
        p.body = f.json;
      }
      else {
        p.kind = ObjectKind::Reference;
        p.body = master.to_uri();
      }
      d.payload = encode_payload(p);
      d.freshness = freshness;
      out.push_back(std::move(d));
    }
  }
  return out;
}

std::string
to_string(InsertStatus s)
{
  switch (s) {
  case InsertStatus::Ok: return "ok";
  case InsertStatus::BadSignature: return "bad-signature";
  case InsertStatus::Denied: return "denied";
  case InsertStatus::Duplicate: return "duplicate";
  case InsertStatus::Malformed: return "malformed";
  case InsertStatus::NotOwner: return "not-owner";
  }
  return "?";
}

std::string
to_string(DeleteStatus s)
{
  switch (s) {
  case DeleteStatus::Ok: return "ok";
  case DeleteStatus::NotFound: return "not-found";
  case DeleteStatus::Denied: return "denied";
  case DeleteStatus::Malformed: return "malformed";
  }
  return "?";
}

} // namespace ogb::engine
