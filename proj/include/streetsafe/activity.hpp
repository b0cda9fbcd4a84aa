#pragma once

// Cell-grid phone activity counts -> district activity metrics:
//   R_p   = people / area            (per km²)
//   R_f   = females / people
//   R_<30 = people under 30 / people
//   R_>50 = people over 50 / people
// all over a 24h window.

#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <boost/geometry.hpp>
#include <boost/geometry/geometries/point_xy.hpp>
#include <boost/geometry/geometries/polygon.hpp>
#include <boost/geometry/geometries/multi_polygon.hpp>

#include "streetsafe/csv.hpp"
#include "streetsafe/errors.hpp"
#include "streetsafe/geo.hpp"
#include "streetsafe/geodata.hpp"

namespace streetsafe::activity {

enum class Gender { male = 0, female = 1 };
enum class AgeBand { under_30 = 0, from_30_to_50 = 1, over_50 = 2 };

/// People counts by gender × age band.
struct CountTable {
  std::array<std::array<double, 3>, 2> cells{};

  double& at(Gender g, AgeBand a) { return cells[static_cast<int>(g)][static_cast<int>(a)]; }
  double at(Gender g, AgeBand a) const { return cells[static_cast<int>(g)][static_cast<int>(a)]; }

  double total() const {
    double s = 0.0;
    for (const auto& row : cells)
      for (double v : row) s += v;
    return s;
  }
  double gender(Gender g) const {
    const auto& row = cells[static_cast<int>(g)];
    return row[0] + row[1] + row[2];
  }
  double age(AgeBand a) const { return cells[0][static_cast<int>(a)] + cells[1][static_cast<int>(a)]; }

  CountTable& operator+=(const CountTable& o) {
    for (int g = 0; g < 2; ++g)
      for (int a = 0; a < 3; ++a) cells[g][a] += o.cells[g][a];
    return *this;
  }
  CountTable scaled(double f) const {
    CountTable t = *this;
    for (auto& row : t.cells)
      for (double& v : row) v *= f;
    return t;
  }
};

struct CdrCell {
  std::string cell_id;
  geo::MultiPolygon geometry;
  CountTable counts;  ///< already reduced to the 24h window
};

/// How hourly counts are reduced to the 24h window.
enum class WindowRule {
  mean_daily,  ///< mean over observed days of the per-day sum of hourly counts
  sum,         ///< sum of all hourly counts
};

struct ActivityMetrics {
  double R_p = 0.0;
  double R_f = 0.0;
  double R_young = 0.0;
  double R_old = 0.0;
  double people = 0.0;
  std::string window = "24h";
};

// --- allocation -----------------------------------------------------------------

namespace bg = boost::geometry;
using BgPoint = bg::model::d2::point_xy<double>;
using BgPolygon = bg::model::polygon<BgPoint, false, true>;
using BgMulti = bg::model::multi_polygon<BgPolygon>;

inline BgMulti to_planar(const geo::MultiPolygon& mp, const geo::LocalProjection& proj) {
  BgMulti out;
  for (const auto& poly : mp) {
    BgPolygon p;
    for (const auto& v : poly.outer) {
      const auto q = proj.forward(v);
      bg::append(p.outer(), BgPoint(q.x, q.y));
    }
    for (const auto& h : poly.holes) {
      p.inners().emplace_back();
      for (const auto& v : h) {
        const auto q = proj.forward(v);
        bg::append(p.inners().back(), BgPoint(q.x, q.y));
      }
    }
    out.push_back(std::move(p));
  }
  bg::correct(out);
  return out;
}

struct DistrictCounts {
  std::map<std::string, CountTable> by_district;
  /// Counts of cell area not covered by any district (plus skipped cells).
  CountTable unallocated;
  std::vector<std::string> warnings;
};

/**
 * Splits each cell's counts among districts in proportion to the area of the
 * cell that falls inside each district. Zero-area cells are skipped with a
 * warning; their counts are reported as unallocated.
 */
inline DistrictCounts district_counts(const std::vector<CdrCell>& cells,
                                      const std::vector<geodata::District>& districts) {
  DistrictCounts out;
  geo::BBox all;
  for (const auto& c : cells) {
    const auto b = geo::bbox(c.geometry);
    if (!b.empty()) {
      all.extend({b.min_lon, b.min_lat});
      all.extend({b.max_lon, b.max_lat});
    }
  }
  for (const auto& d : districts) out.by_district[d.id] = CountTable{};
  if (all.empty()) {
    for (const auto& c : cells) out.unallocated += c.counts;
    return out;
  }
  const auto proj = geo::LocalProjection::around(all);

  std::vector<BgMulti> district_shapes;
  std::vector<geo::BBox> district_boxes;
  district_shapes.reserve(districts.size());
  for (const auto& d : districts) {
    district_shapes.push_back(to_planar(d.geometry, proj));
    district_boxes.push_back(geo::bbox(d.geometry));
  }

  for (const auto& cell : cells) {
    const BgMulti shape = to_planar(cell.geometry, proj);
    const double cell_area = bg::area(shape);
    if (!(cell_area > 0.0)) {
      out.warnings.push_back("cell '" + cell.cell_id + "' has zero area; skipped");
      out.unallocated += cell.counts;
      continue;
    }
    const auto cell_box = geo::bbox(cell.geometry);
    std::vector<std::pair<std::size_t, double>> shares;
    double share_sum = 0.0;
    for (std::size_t k = 0; k < districts.size(); ++k) {
      if (!cell_box.intersects(district_boxes[k])) continue;
      BgMulti inter;
      bg::intersection(shape, district_shapes[k], inter);
      const double a = bg::area(inter);
      if (a > 0.0) {
        shares.emplace_back(k, a / cell_area);
        share_sum += a / cell_area;
      }
    }
    // Overlapping districts would claim more than the whole cell.
    const double norm = share_sum > 1.0 ? share_sum : 1.0;
    CountTable given;
    for (const auto& [k, f] : shares) {
      const CountTable part = cell.counts.scaled(f / norm);
      out.by_district[districts[k].id] += part;
      given += part;
    }
    CountTable rest = cell.counts;
    for (int g = 0; g < 2; ++g)
      for (int a = 0; a < 3; ++a) rest.cells[g][a] -= given.cells[g][a];
    out.unallocated += rest;
  }
  return out;
}

struct MetricsResult {
  std::map<std::string, ActivityMetrics> metrics;
  /// Districts without observed people (ratios undefined) or absent from the counts.
  std::vector<std::string> missing;
};

inline MetricsResult compute_metrics(const DistrictCounts& counts,
                                     const std::vector<geodata::District>& districts) {
  MetricsResult out;
  for (const auto& d : districts) {
    const auto it = counts.by_district.find(d.id);
    const double area = d.area_km2();
    if (it == counts.by_district.end() || !(area > 0.0)) {
      out.missing.push_back(d.id);
      continue;
    }
    const CountTable& t = it->second;
    const double people = t.total();
    if (!(people > 0.0)) {
      out.missing.push_back(d.id);
      continue;
    }
    ActivityMetrics m;
    m.people = people;
    m.R_p = people / area;
    m.R_f = t.gender(Gender::female) / people;
    m.R_young = t.age(AgeBand::under_30) / people;
    m.R_old = t.age(AgeBand::over_50) / people;
    out.metrics[d.id] = m;
  }
  return out;
}

struct FilterResult {
  std::vector<geodata::District> retained;
  std::vector<std::string> warnings;
};

/// Keeps districts whose non-farmland/forest surface fraction exceeds one half.
inline FilterResult urban_filter(const std::vector<geodata::District>& districts, double threshold = 0.5) {
  FilterResult out;
  for (const auto& d : districts) {
    if (!d.census.urban_fraction) {
      out.warnings.push_back("district '" + d.id + "' has no urban_fraction; excluded");
      continue;
    }
    if (*d.census.urban_fraction > threshold) out.retained.push_back(d);
  }
  return out;
}

// --- CSV ingestion ------------------------------------------------------------------

inline Gender parse_gender(const std::string& s, const csv::Table& t, std::size_t row) {
  if (s == "male" || s == "M" || s == "m") return Gender::male;
  if (s == "female" || s == "F" || s == "f") return Gender::female;
  throw SchemaError(t.source(), "gender", "row " + std::to_string(row + 1) + ": expected male|female, got '" + s + "'");
}

inline AgeBand parse_age_band(const std::string& s, const csv::Table& t, std::size_t row) {
  if (s == "<30") return AgeBand::under_30;
  if (s == "30-50" || s == "30–50") return AgeBand::from_30_to_50;
  if (s == ">50") return AgeBand::over_50;
  throw SchemaError(t.source(), "age_band", "row " + std::to_string(row + 1) + ": expected <30|30-50|>50, got '" + s + "'");
}

/// Calendar day of an ISO-8601 timestamp, or of a Unix epoch in seconds (UTC).
inline std::string day_of(const std::string& ts, const csv::Table& t, std::size_t row) {
  if (ts.size() >= 10 && ts[4] == '-' && ts[7] == '-') return ts.substr(0, 10);
  bool digits = !ts.empty();
  for (char c : ts) digits = digits && (c >= '0' && c <= '9');
  if (digits) return "epoch-day-" + std::to_string(std::stoll(ts) / 86400);
  throw SchemaError(t.source(), "timestamp", "row " + std::to_string(row + 1) + ": unrecognised timestamp '" + ts + "'");
}

/// Long-format hourly counts `cell_id,timestamp,gender,age_band,count`
/// reduced to one 24h table per cell.
inline std::map<std::string, CountTable> parse_hourly_counts(const csv::Table& t, WindowRule rule) {
  const auto ci = t.column("cell_id");
  const auto ti = t.column("timestamp");
  const auto gi = t.column("gender");
  const auto ai = t.column("age_band");
  const auto ni = t.column("count");
  std::map<std::string, CountTable> sums;
  std::map<std::string, std::set<std::string>> days;
  for (std::size_t r = 0; r < t.size(); ++r) {
    const auto& row = t.rows()[r];
    const double n = t.number(r, ni);
    if (!(n >= 0.0) || !std::isfinite(n))
      throw SchemaError(t.source(), "count", "row " + std::to_string(r + 1) + ": count must be >= 0");
    sums[row[ci]].at(parse_gender(row[gi], t, r), parse_age_band(row[ai], t, r)) += n;
    days[row[ci]].insert(day_of(row[ti], t, r));
  }
  if (rule == WindowRule::mean_daily) {
    for (auto& [id, table] : sums) table = table.scaled(1.0 / static_cast<double>(days[id].size()));
  }
  return sums;
}

inline std::string metrics_csv(const MetricsResult& result, const std::vector<geodata::District>& districts) {
  csv::Writer w({"district_id", "people", "R_p", "R_f", "R_young", "R_old", "missing"});
  for (const auto& d : districts) {
    const auto it = result.metrics.find(d.id);
    if (it == result.metrics.end()) {
      w.row({d.id, "", "", "", "", "", "1"});
      continue;
    }
    const auto& m = it->second;
    w.row({d.id, csv::format_number(m.people), csv::format_number(m.R_p), csv::format_number(m.R_f),
           csv::format_number(m.R_young), csv::format_number(m.R_old), "0"});
  }
  return w.str();
}

}  // namespace streetsafe::activity
