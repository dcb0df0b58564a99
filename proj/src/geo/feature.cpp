#include "ogb/geo/feature.hpp"

#include "json.hpp"

namespace ogb::geo {

using nlohmann::json;

namespace {

GeoCoord
coord(const json& j)
{
  if (!j.is_array() || j.size() < 2 || !j[0].is_number() || !j[1].is_number())
    throw GeoError("coordinate must be [lng, lat]");
  return {j[0].get<double>(), j[1].get<double>()};
}

void
collect(const json& j, std::vector<GeoCoord>& out)
{
  if (!j.is_array())
    throw GeoError("coordinates must be arrays");
  if (!j.empty() && j[0].is_number()) {
    out.push_back(coord(j));
    return;
  }
  for (const auto& sub : j)
    collect(sub, out);
}

void
collect_geometry(const json& g, std::vector<GeoCoord>& out)
{
  if (g.contains("geometries")) {
    for (const auto& sub : g.at("geometries"))
      collect_geometry(sub, out);
    return;
  }
  collect(g.at("coordinates"), out);
}

std::string
identifier(const json& props, const char* key)
{
  if (!props.contains(key))
    throw GeoError(std::string("missing mandatory property ") + key);
  const auto& v = props.at(key);
  std::string s;
  if (v.is_string())
    s = v.get<std::string>();
  else if (v.is_number_integer())
    s = v.dump();
  else
    throw GeoError(std::string("property ") + key + " must be a string or integer");
  if (s.empty())
    throw GeoError(std::string("property ") + key + " is empty");
  if (s.find('/') != std::string::npos)
    throw GeoError(std::string("property ") + key + " contains '/'");
  return s;
}

json
geometry_json(const Geometry& g)
{
  switch (g.kind) {
  case GeometryKind::Point:
    return {{"type", "Point"}, {"coordinates", {g.points[0].lng, g.points[0].lat}}};
  case GeometryKind::MultiPoint: {
    json pts = json::array();
    for (const auto& p : g.points)
      pts.push_back({p.lng, p.lat});
    return {{"type", "MultiPoint"}, {"coordinates", pts}};
  }
  case GeometryKind::Other:
    return {{"type", "Polygon"},
            {"coordinates",
             {{{g.bbox.min.lng, g.bbox.min.lat},
               {g.bbox.max.lng, g.bbox.min.lat},
               {g.bbox.max.lng, g.bbox.max.lat},
               {g.bbox.min.lng, g.bbox.max.lat},
               {g.bbox.min.lng, g.bbox.min.lat}}}}};
  }
  return {};
}

} // namespace

Feature
parse_feature(std::string_view text)
{
  json doc;
  try {
    doc = json::parse(text);
  }
  catch (const json::exception& e) {
    throw GeoError(std::string("invalid JSON: ") + e.what());
  }
  try {
    if (!doc.is_object() || doc.value("type", "") != "Feature")
      throw GeoError("not a GeoJSON Feature");
    const auto& props = doc.at("properties");
    Feature f;
    f.oid = identifier(props, "oid");
    f.tid = identifier(props, "tid");
    f.uid = identifier(props, "uid");
    f.cid = identifier(props, "cid");

    const auto& g = doc.at("geometry");
    auto type = g.at("type").get<std::string>();
    if (type == "Point") {
      f.geometry = Geometry::point(coord(g.at("coordinates")));
    }
    else if (type == "MultiPoint") {
      std::vector<GeoCoord> pts;
      for (const auto& c : g.at("coordinates"))
        pts.push_back(coord(c));
      f.geometry = Geometry::multipoint(std::move(pts));
    }
    else {
      std::vector<GeoCoord> pts;
      collect_geometry(g, pts);
      if (pts.empty())
        throw GeoError("geometry without coordinates");
      auto mp = Geometry::multipoint(std::move(pts));
      f.geometry = Geometry::other(mp.bbox);
    }

    if (doc.contains("temporalExtent")) {
      const auto& vt = doc.at("temporalExtent").at("validTime");
      const auto& v = vt.at("value");
      if (!v.is_array() || v.size() != 2 || !v[0].is_number_integer() || !v[1].is_number_integer())
        throw GeoError("validTime value must be two epoch-second integers");
      f.valid_time = TimeInterval{v[0].get<std::int64_t>(), v[1].get<std::int64_t>()};
      if (f.valid_time->end < f.valid_time->start)
        throw GeoError("validTime ends before it starts");
    }
    f.json = doc.dump();
    return f;
  }
  catch (const json::exception& e) {
    throw GeoError(std::string("malformed Feature: ") + e.what());
  }
}

std::string
make_feature_json(const std::string& oid, const std::string& tid, const std::string& uid,
                  const std::string& cid, const Geometry& g, const std::optional<TimeInterval>& valid_time,
                  const std::string& extra_properties_json)
{
  json props = extra_properties_json.empty() ? json::object() : json::parse(extra_properties_json);
  props["oid"] = oid;
  props["tid"] = tid;
  props["uid"] = uid;
  props["cid"] = cid;
  json doc{{"type", "Feature"}, {"geometry", geometry_json(g)}, {"properties", props}};
  if (valid_time)
    doc["temporalExtent"] = {{"validTime", {{"type", "interval"}, {"value", {valid_time->start, valid_time->end}}}}};
  return doc.dump();
}

} // namespace ogb::geo
