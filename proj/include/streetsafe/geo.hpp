#pragma once

// WGS84 polygon primitives on a local equirectangular plane. Cities span
// well under a degree of latitude, where this projection is within 0.5% of
// a conformal one.

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

namespace streetsafe::geo {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kEarthRadiusM = 6371008.8;  // mean radius
inline constexpr double kMetresPerDegree = kPi * kEarthRadiusM / 180.0;

struct LonLat {
  double lon = 0.0;
  double lat = 0.0;

  friend bool operator==(const LonLat&, const LonLat&) = default;
};

/// Implicitly closed: the last vertex connects back to the first.
using Ring = std::vector<LonLat>;

struct Polygon {
  Ring outer;
  std::vector<Ring> holes;
};

using MultiPolygon = std::vector<Polygon>;

struct BBox {
  double min_lon = std::numeric_limits<double>::infinity();
  double min_lat = std::numeric_limits<double>::infinity();
  double max_lon = -std::numeric_limits<double>::infinity();
  double max_lat = -std::numeric_limits<double>::infinity();

  void extend(const LonLat& p) {
    min_lon = std::min(min_lon, p.lon);
    max_lon = std::max(max_lon, p.lon);
    min_lat = std::min(min_lat, p.lat);
    max_lat = std::max(max_lat, p.lat);
  }
  bool empty() const { return !(min_lon <= max_lon && min_lat <= max_lat); }
  bool intersects(const BBox& o, double tol = 0.0) const {
    return !(o.min_lon > max_lon + tol || o.max_lon < min_lon - tol || o.min_lat > max_lat + tol ||
             o.max_lat < min_lat - tol);
  }
  bool contains(const LonLat& p, double tol = 0.0) const {
    return p.lon >= min_lon - tol && p.lon <= max_lon + tol && p.lat >= min_lat - tol &&
           p.lat <= max_lat + tol;
  }
};

/// Drops a repeated closing vertex so rings are stored implicitly closed.
inline Ring open_ring(Ring ring) {
  if (ring.size() > 1 && ring.front() == ring.back()) ring.pop_back();
  return ring;
}

template <class F>
void for_each_ring(const MultiPolygon& mp, F&& f) {
  for (const auto& poly : mp) {
    f(poly.outer);
    for (const auto& h : poly.holes) f(h);
  }
}

inline BBox bbox(const MultiPolygon& mp) {
  BBox b;
  for_each_ring(mp, [&](const Ring& r) {
    for (const auto& p : r) b.extend(p);
  });
  return b;
}

/// Planar metres around a reference point.
struct XY {
  double x = 0.0;
  double y = 0.0;
};

class LocalProjection {
 public:
  LocalProjection(double lon0, double lat0)
      : lon0_(lon0), lat0_(lat0), kx_(kMetresPerDegree * std::cos(lat0 * kPi / 180.0)) {}

  /// Centred on the middle of a bounding box.
  static LocalProjection around(const BBox& b) {
    return LocalProjection(0.5 * (b.min_lon + b.max_lon), 0.5 * (b.min_lat + b.max_lat));
  }

  XY forward(const LonLat& p) const {
    return {(p.lon - lon0_) * kx_, (p.lat - lat0_) * kMetresPerDegree};
  }
  LonLat inverse(const XY& q) const {
    return {lon0_ + q.x / kx_, lat0_ + q.y / kMetresPerDegree};
  }

  double lat0() const { return lat0_; }

 private:
  double lon0_, lat0_, kx_;
};

/// Signed shoelace area of a ring in m² (positive when counter-clockwise).
inline double signed_area_m2(const Ring& ring, const LocalProjection& proj) {
  const std::size_t n = ring.size();
  if (n < 3) return 0.0;
  double acc = 0.0;
  XY prev = proj.forward(ring[n - 1]);
  for (std::size_t i = 0; i < n; ++i) {
    const XY cur = proj.forward(ring[i]);
    acc += prev.x * cur.y - cur.x * prev.y;
    prev = cur;
  }
  return 0.5 * acc;
}

inline double area_m2(const MultiPolygon& mp, const LocalProjection& proj) {
  double total = 0.0;
  for (const auto& poly : mp) {
    double a = std::abs(signed_area_m2(poly.outer, proj));
    for (const auto& h : poly.holes) a -= std::abs(signed_area_m2(h, proj));
    total += a;
  }
  return total;
}

inline double area_km2(const MultiPolygon& mp) {
  const BBox b = bbox(mp);
  if (b.empty()) return 0.0;
  return area_m2(mp, LocalProjection::around(b)) * 1e-6;
}

inline double point_segment_distance2(double px, double py, double ax, double ay, double bx,
                                      double by) {
  const double dx = bx - ax, dy = by - ay;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - ax) * dx + (py - ay) * dy) / len2, 0.0, 1.0);
  const double ex = ax + t * dx - px, ey = ay + t * dy - py;
  return ex * ex + ey * ey;
}

/// Even-odd crossing test over every ring of the multipolygon.
inline bool inside_even_odd(const MultiPolygon& mp, const LonLat& p) {
  bool inside = false;
  for_each_ring(mp, [&](const Ring& r) {
    const std::size_t n = r.size();
    for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
      const auto& a = r[i];
      const auto& b = r[j];
      if ((a.lat > p.lat) != (b.lat > p.lat)) {
        const double x = (b.lon - a.lon) * (p.lat - a.lat) / (b.lat - a.lat) + a.lon;
        if (p.lon < x) inside = !inside;
      }
    }
  });
  return inside;
}

/// True when `p` lies within `tol` degrees of any ring edge.
inline bool on_boundary(const MultiPolygon& mp, const LonLat& p, double tol) {
  bool hit = false;
  const double tol2 = tol * tol;
  for_each_ring(mp, [&](const Ring& r) {
    if (hit) return;
    const std::size_t n = r.size();
    for (std::size_t i = 0, j = n - 1; i < n && !hit; j = i++) {
      if (point_segment_distance2(p.lon, p.lat, r[j].lon, r[j].lat, r[i].lon, r[i].lat) <= tol2)
        hit = true;
    }
  });
  return hit;
}

enum class Location { outside, inside, boundary };

inline constexpr double kBoundaryTolDeg = 1e-9;

inline Location locate(const MultiPolygon& mp, const LonLat& p, double tol = kBoundaryTolDeg) {
  if (on_boundary(mp, p, tol)) return Location::boundary;
  return inside_even_odd(mp, p) ? Location::inside : Location::outside;
}

/// Axis-aligned rectangle helper, counter-clockwise.
inline Polygon rectangle(double min_lon, double min_lat, double max_lon, double max_lat) {
  return Polygon{{{min_lon, min_lat}, {max_lon, min_lat}, {max_lon, max_lat}, {min_lon, max_lat}},
                 {}};
}

}  // namespace streetsafe::geo
