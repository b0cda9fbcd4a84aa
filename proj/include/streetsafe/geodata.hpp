#pragma once

// Districts, densification grids, point-to-district assignment and the
// two-stage (location, then district) aggregation of image scores.

#include <algorithm>
#include <array>
#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "streetsafe/errors.hpp"
#include "streetsafe/geo.hpp"

namespace streetsafe::geodata {

/// Census covariates. Any of them may be absent in the input; stages that
/// need one check for it.
struct Census {
  std::optional<double> population;
  std::optional<double> employees;
  std::optional<double> deprivation;
  std::optional<double> pct_women;
  std::optional<double> pct_young;    ///< residents < 30
  std::optional<double> pct_elderly;  ///< residents > 50
  std::optional<double> dist_centre;  ///< km
  std::optional<double> urban_fraction;
  std::optional<double> area_i;  ///< km²
};

struct District {
  std::string id;
  geo::MultiPolygon geometry;
  Census census;
  /// Free-form string properties (e.g. "city").
  std::map<std::string, std::string> tags;
  /// Other numeric properties (e.g. "safety_score" added by aggregation).
  std::map<std::string, double> values;

  /// Declared area when present, otherwise the polygon area.
  double area_km2() const {
    if (census.area_i) return *census.area_i;
    return geo::area_km2(geometry);
  }
};

inline constexpr std::array<double, 4> kHeadings{0.0, 90.0, 180.0, 270.0};

struct SamplePoint {
  double lat = 0.0;
  double lon = 0.0;
  std::array<double, 4> headings = kHeadings;
};

struct ScoreRecord {
  std::string image_id;
  double lat = 0.0;
  double lon = 0.0;
  double heading = 0.0;
  double score = 0.0;
};

/**
 * Square lattice of sample locations with spacing 1000/sqrt(density) metres,
 * anchored half a step inside the region's bounding box and clipped to the
 * region (boundary points kept). Each location carries the four cardinal
 * headings.
 */
inline std::vector<SamplePoint> generate_grid(const geo::MultiPolygon& region, double density_per_km2) {
  if (!(density_per_km2 > 0.0) || !std::isfinite(density_per_km2))
    throw InvalidInput("generate_grid: density must be > 0");
  const geo::BBox box = geo::bbox(region);
  if (box.empty() || geo::area_km2(region) <= 0.0) return {};

  const auto proj = geo::LocalProjection::around(box);
  const double step = 1000.0 / std::sqrt(density_per_km2);
  const geo::XY lo = proj.forward({box.min_lon, box.min_lat});
  const geo::XY hi = proj.forward({box.max_lon, box.max_lat});

  std::vector<SamplePoint> points;
  for (long j = 0;; ++j) {
    const double y = lo.y + (static_cast<double>(j) + 0.5) * step;
    if (!(y < hi.y)) break;
    for (long i = 0;; ++i) {
      const double x = lo.x + (static_cast<double>(i) + 0.5) * step;
      if (!(x < hi.x)) break;
      const geo::LonLat p = proj.inverse({x, y});
      if (geo::locate(region, p) != geo::Location::outside) points.push_back({p.lat, p.lon});
    }
  }
  return points;
}

/// Spatial index-free join helper: precomputed boxes and areas.
class DistrictLocator {
 public:
  explicit DistrictLocator(const std::vector<District>& districts) : districts_(districts) {
    boxes_.reserve(districts.size());
    areas_.reserve(districts.size());
    for (const auto& d : districts) {
      boxes_.push_back(geo::bbox(d.geometry));
      areas_.push_back(geo::area_km2(d.geometry));
    }
  }

  /// Index of the containing district. Points on a boundary or inside
  /// several overlapping polygons go to the smallest polygon; equal areas
  /// resolve to the earliest district.
  std::optional<std::size_t> find(const geo::LonLat& p) const {
    std::optional<std::size_t> best;
    for (std::size_t k = 0; k < districts_.size(); ++k) {
      if (!boxes_[k].contains(p, geo::kBoundaryTolDeg)) continue;
      if (geo::locate(districts_[k].geometry, p) == geo::Location::outside) continue;
      // Areas within rounding of each other count as equal.
      if (!best || areas_[k] < areas_[*best] * (1.0 - 1e-9)) best = k;
    }
    return best;
  }

 private:
  const std::vector<District>& districts_;
  std::vector<geo::BBox> boxes_;
  std::vector<double> areas_;
};

inline std::vector<std::optional<std::size_t>> assign_points(const std::vector<geo::LonLat>& points,
                                                             const std::vector<District>& districts) {
  DistrictLocator locator(districts);
  std::vector<std::optional<std::size_t>> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(locator.find(p));
  return out;
}

struct DistrictScore {
  double safety_score = 0.0;
  std::size_t n_locations = 0;
  std::size_t n_images = 0;
};

struct RecordError {
  std::size_t index;
  std::string image_id;
  std::string message;
};

struct Aggregation {
  std::map<std::string, DistrictScore> scores;
  /// Districts that received no location, in input order.
  std::vector<std::string> missing;
  std::vector<RecordError> rejected;
  /// Locations (and their images) that fell in no district.
  std::size_t dropped_locations = 0;
  std::size_t dropped_images = 0;
};

namespace detail {

/// Order-independent mean: sum in sorted order.
inline double stable_mean(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace detail

/**
 * Mean over the headings of each location first, then unweighted mean of the
 * location means inside each district. Records with a score outside [0,10]
 * (or non-finite) are rejected and reported.
 */
inline Aggregation aggregate_scores(const std::vector<ScoreRecord>& records,
                                    const std::vector<District>& districts) {
  Aggregation result;
  std::map<std::pair<double, double>, std::vector<double>> by_location;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!std::isfinite(r.score) || r.score < 0.0 || r.score > 10.0) {
      result.rejected.push_back({i, r.image_id, "score outside [0,10]"});
      continue;
    }
    if (!std::isfinite(r.lat) || !std::isfinite(r.lon)) {
      result.rejected.push_back({i, r.image_id, "non-finite location"});
      continue;
    }
    by_location[{r.lat, r.lon}].push_back(r.score);
  }

  DistrictLocator locator(districts);
  std::vector<std::vector<double>> location_means(districts.size());
  std::vector<std::size_t> images(districts.size(), 0);
  for (auto& [key, scores] : by_location) {
    const auto k = locator.find({key.second, key.first});
    if (!k) {
      ++result.dropped_locations;
      result.dropped_images += scores.size();
      continue;
    }
    images[*k] += scores.size();
    location_means[*k].push_back(detail::stable_mean(std::move(scores)));
  }

  for (std::size_t k = 0; k < districts.size(); ++k) {
    if (location_means[k].empty()) {
      result.missing.push_back(districts[k].id);
      continue;
    }
    DistrictScore ds;
    ds.n_locations = location_means[k].size();
    ds.n_images = images[k];
    ds.safety_score = detail::stable_mean(std::move(location_means[k]));
    result.scores[districts[k].id] = ds;
  }
  return result;
}

}  // namespace streetsafe::geodata
