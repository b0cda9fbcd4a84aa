#pragma once

// GeoJSON FeatureCollection <-> District / polygon conversion, plus the
// score-record CSV schema.

#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "streetsafe/csv.hpp"
#include "streetsafe/errors.hpp"
#include "streetsafe/geo.hpp"
#include "streetsafe/geodata.hpp"

namespace streetsafe::geojson {

using nlohmann::json;

inline json read_json(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError(path, "file", "cannot open");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw SchemaError(path, "file", std::string("invalid JSON: ") + e.what());
  }
}

namespace detail {

inline geo::Ring parse_ring(const json& coords, const std::string& source) {
  if (!coords.is_array()) throw SchemaError(source, "geometry.coordinates", "ring is not an array");
  geo::Ring ring;
  ring.reserve(coords.size());
  for (const auto& pt : coords) {
    if (!pt.is_array() || pt.size() < 2 || !pt[0].is_number() || !pt[1].is_number())
      throw SchemaError(source, "geometry.coordinates", "position must be [lon, lat]");
    ring.push_back({pt[0].get<double>(), pt[1].get<double>()});
  }
  ring = geo::open_ring(std::move(ring));
  if (ring.size() < 3) throw SchemaError(source, "geometry.coordinates", "ring has fewer than 3 vertices");
  return ring;
}

inline geo::Polygon parse_polygon(const json& rings, const std::string& source) {
  if (!rings.is_array() || rings.empty())
    throw SchemaError(source, "geometry.coordinates", "polygon needs at least one ring");
  geo::Polygon poly;
  poly.outer = parse_ring(rings[0], source);
  for (std::size_t i = 1; i < rings.size(); ++i) poly.holes.push_back(parse_ring(rings[i], source));
  return poly;
}

inline json ring_to_json(const geo::Ring& ring) {
  json arr = json::array();
  for (const auto& p : ring) arr.push_back({p.lon, p.lat});
  if (!ring.empty()) arr.push_back({ring.front().lon, ring.front().lat});
  return arr;
}

}  // namespace detail

/// Polygon or MultiPolygon geometry object.
inline geo::MultiPolygon parse_geometry(const json& geometry, const std::string& source) {
  if (!geometry.is_object() || !geometry.contains("type"))
    throw SchemaError(source, "geometry", "missing geometry object");
  const std::string type = geometry.at("type").get<std::string>();
  const json& coords = geometry.value("coordinates", json());
  if (type == "Polygon") return {detail::parse_polygon(coords, source)};
  if (type == "MultiPolygon") {
    if (!coords.is_array()) throw SchemaError(source, "geometry.coordinates", "not an array");
    geo::MultiPolygon mp;
    for (const auto& p : coords) mp.push_back(detail::parse_polygon(p, source));
    return mp;
  }
  throw SchemaError(source, "geometry.type", "expected Polygon or MultiPolygon, got " + type);
}

inline json geometry_to_json(const geo::MultiPolygon& mp) {
  if (mp.size() == 1) {
    json rings = json::array();
    rings.push_back(detail::ring_to_json(mp[0].outer));
    for (const auto& h : mp[0].holes) rings.push_back(detail::ring_to_json(h));
    return {{"type", "Polygon"}, {"coordinates", rings}};
  }
  json polys = json::array();
  for (const auto& poly : mp) {
    json rings = json::array();
    rings.push_back(detail::ring_to_json(poly.outer));
    for (const auto& h : poly.holes) rings.push_back(detail::ring_to_json(h));
    polys.push_back(rings);
  }
  return {{"type", "MultiPolygon"}, {"coordinates", polys}};
}

inline const json& features_of(const json& doc, const std::string& source) {
  if (!doc.is_object() || doc.value("type", "") != "FeatureCollection" || !doc.contains("features") ||
      !doc.at("features").is_array())
    throw SchemaError(source, "type", "expected a FeatureCollection");
  return doc.at("features");
}

/// Feature id: `properties.<id_key>`, falling back to the feature-level id.
inline std::string feature_id(const json& feature, const std::string& id_key, const std::string& source,
                              std::size_t index) {
  const json& props = feature.value("properties", json::object());
  const json* id = nullptr;
  if (props.is_object() && props.contains(id_key)) id = &props.at(id_key);
  else if (feature.contains("id")) id = &feature.at("id");
  if (!id || id->is_null())
    throw SchemaError(source, id_key, "feature " + std::to_string(index) + " has no id");
  if (id->is_string()) return id->get<std::string>();
  if (id->is_number_integer()) return std::to_string(id->get<long long>());
  return id->dump();
}

inline const std::set<std::string> kCensusKeys{"population",  "employees",   "deprivation",
                                               "pct_women",   "pct_young",   "pct_elderly",
                                               "dist_centre", "urban_fraction", "area_i"};

/**
 * Districts from a FeatureCollection. Census properties use the District
 * field names; fractions must lie in [0,1] and area_i must be positive.
 * Other string properties are kept as tags.
 */
inline std::vector<geodata::District> parse_districts(const json& doc, const std::string& source) {
  std::vector<geodata::District> out;
  std::set<std::string> seen;
  const json& features = features_of(doc, source);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const json& f = features[i];
    geodata::District d;
    d.id = feature_id(f, "id", source, i);
    if (!seen.insert(d.id).second) throw SchemaError(source, "id", "duplicate district id '" + d.id + "'");
    d.geometry = parse_geometry(f.value("geometry", json()), source);
    const json props = f.value("properties", json::object());

    auto number = [&](const char* key, bool fraction) -> std::optional<double> {
      if (!props.is_object() || !props.contains(key) || props.at(key).is_null()) return std::nullopt;
      const json& v = props.at(key);
      if (!v.is_number())
        throw SchemaError(source, key, "district '" + d.id + "': expected a number");
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw SchemaError(source, key, "district '" + d.id + "': non-finite");
      if (fraction && (x < 0.0 || x > 1.0))
        throw SchemaError(source, key, "district '" + d.id + "': fraction outside [0,1]");
      return x;
    };
    d.census.population = number("population", false);
    d.census.employees = number("employees", false);
    d.census.deprivation = number("deprivation", false);
    d.census.pct_women = number("pct_women", true);
    d.census.pct_young = number("pct_young", true);
    d.census.pct_elderly = number("pct_elderly", true);
    d.census.dist_centre = number("dist_centre", false);
    d.census.urban_fraction = number("urban_fraction", true);
    d.census.area_i = number("area_i", false);
    if (d.census.area_i && !(*d.census.area_i > 0.0))
      throw SchemaError(source, "area_i", "district '" + d.id + "': area must be > 0");
    for (const char* key : {"population", "employees"}) {
      auto v = number(key, false);
      if (v && *v < 0.0) throw SchemaError(source, key, "district '" + d.id + "': negative count");
    }
    if (props.is_object()) {
      for (auto it = props.begin(); it != props.end(); ++it) {
        if (it.key() == "id") continue;
        if (it.value().is_string()) d.tags[it.key()] = it.value().get<std::string>();
        else if (it.value().is_number() && !kCensusKeys.contains(it.key())) d.values[it.key()] = it.value().get<double>();
      }
    }
    out.push_back(std::move(d));
  }
  return out;
}

inline std::vector<geodata::District> read_districts(const std::string& path) {
  return parse_districts(read_json(path), path);
}

/// Region polygon: a bare geometry, a Feature, or the union (as parts) of a
/// FeatureCollection's geometries.
inline geo::MultiPolygon parse_region(const json& doc, const std::string& source) {
  const std::string type = doc.value("type", "");
  if (type == "Feature") return parse_geometry(doc.value("geometry", json()), source);
  if (type == "FeatureCollection") {
    geo::MultiPolygon mp;
    for (const auto& f : features_of(doc, source)) {
      auto part = parse_geometry(f.value("geometry", json()), source);
      mp.insert(mp.end(), part.begin(), part.end());
    }
    return mp;
  }
  return parse_geometry(doc, source);
}

// --- score records ----------------------------------------------------------

inline std::vector<geodata::ScoreRecord> parse_score_records(const csv::Table& t) {
  const auto ii = t.column("image_id");
  const auto la = t.column("lat");
  const auto lo = t.column("lon");
  const auto he = t.column("heading");
  const auto sc = t.column("score");
  std::vector<geodata::ScoreRecord> out;
  out.reserve(t.size());
  for (std::size_t r = 0; r < t.size(); ++r) {
    out.push_back({t.rows()[r][ii], t.number(r, la), t.number(r, lo), t.number(r, he), t.number(r, sc)});
  }
  return out;
}

inline std::string score_records_csv(const std::vector<geodata::ScoreRecord>& records) {
  csv::Writer w({"image_id", "lat", "lon", "heading", "score"});
  for (const auto& r : records) {
    w.row({r.image_id, csv::format_number(r.lat), csv::format_number(r.lon), csv::format_number(r.heading),
           csv::format_number(r.score)});
  }
  return w.str();
}

}  // namespace streetsafe::geojson
