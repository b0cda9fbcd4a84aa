#pragma once

// Binary spatial weights. Queen contiguity: two areas are neighbours when
// their boundaries share at least one point, an edge or a single vertex.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "streetsafe/errors.hpp"
#include "streetsafe/geo.hpp"

namespace streetsafe::stats {

struct Neighbor {
  int index;
  double weight;
};

class SpatialWeights {
 public:
  SpatialWeights() = default;

  /// Takes a square weights matrix. Binary symmetric matrices with a zero
  /// diagonal are the normal case; anything else is accepted as given.
  explicit SpatialWeights(Eigen::MatrixXd matrix) : matrix_(std::move(matrix)) {
    if (matrix_.rows() != matrix_.cols()) throw InvalidInput("weights matrix must be square");
    if (!matrix_.allFinite()) throw InvalidInput("weights matrix has non-finite entries");
    rebuild();
  }

  static SpatialWeights from_pairs(int n, const std::vector<std::pair<int, int>>& pairs) {
    Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
    for (auto [i, j] : pairs) {
      if (i == j) continue;
      m(i, j) = 1.0;
      m(j, i) = 1.0;
    }
    return SpatialWeights(std::move(m));
  }

  int n() const { return static_cast<int>(matrix_.rows()); }
  const Eigen::MatrixXd& matrix() const { return matrix_; }
  double s0() const { return s0_; }
  const std::vector<std::vector<Neighbor>>& neighbors() const { return neighbors_; }
  bool symmetric() const {
    return matrix_.size() == 0 || (matrix_ - matrix_.transpose()).cwiseAbs().maxCoeff() == 0.0;
  }

  /// Rows rescaled to sum to one (rows without neighbours stay zero).
  SpatialWeights row_standardized() const {
    Eigen::MatrixXd m = matrix_;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      const double s = m.row(i).sum();
      if (s > 0.0) m.row(i) /= s;
    }
    return SpatialWeights(std::move(m));
  }

  /// zᵀWz using the sparse neighbour lists.
  double quadratic_form(const Eigen::VectorXd& z) const {
    double acc = 0.0;
    for (int i = 0; i < n(); ++i) {
      double row = 0.0;
      for (const auto& nb : neighbors_[i]) row += nb.weight * z[nb.index];
      acc += z[i] * row;
    }
    return acc;
  }

 private:
  void rebuild() {
    s0_ = matrix_.sum();
    neighbors_.assign(static_cast<std::size_t>(matrix_.rows()), {});
    for (Eigen::Index i = 0; i < matrix_.rows(); ++i)
      for (Eigen::Index j = 0; j < matrix_.cols(); ++j)
        if (matrix_(i, j) != 0.0) neighbors_[i].push_back({static_cast<int>(j), matrix_(i, j)});
  }

  Eigen::MatrixXd matrix_;
  double s0_ = 0.0;
  std::vector<std::vector<Neighbor>> neighbors_;
};

struct QueenResult {
  SpatialWeights weights;
  std::vector<std::string> warnings;
};

/// Coordinates are snapped to this grid (degrees) before vertex matching.
inline constexpr double kSnapDeg = 1e-9;

/**
 * Queen contiguity between polygons. Shared vertices are matched exactly
 * after snapping; a vertex of one polygon lying on an edge of another (a
 * T-junction) also counts.
 */
inline QueenResult queen_weights(const std::vector<geo::MultiPolygon>& shapes, double snap = kSnapDeg) {
  const int n = static_cast<int>(shapes.size());
  QueenResult out;
  if (n == 1) out.warnings.push_back("single area: weights matrix has no neighbours");

  using Key = std::pair<std::int64_t, std::int64_t>;
  auto key = [&](const geo::LonLat& p) {
    return Key{std::llround(p.lon / snap), std::llround(p.lat / snap)};
  };
  std::map<Key, std::vector<int>> owners;
  for (int i = 0; i < n; ++i) {
    std::set<Key> mine;
    geo::for_each_ring(shapes[i], [&](const geo::Ring& r) {
      for (const auto& p : r) mine.insert(key(p));
    });
    for (const auto& k : mine) owners[k].push_back(i);
  }

  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (const auto& [k, who] : owners) {
    for (std::size_t a = 0; a < who.size(); ++a)
      for (std::size_t b = a + 1; b < who.size(); ++b) {
        m(who[a], who[b]) = 1.0;
        m(who[b], who[a]) = 1.0;
      }
  }

  std::vector<geo::BBox> boxes;
  boxes.reserve(shapes.size());
  for (const auto& s : shapes) boxes.push_back(geo::bbox(s));
  auto vertex_on_edge = [&](int i, int j) {
    bool hit = false;
    geo::for_each_ring(shapes[i], [&](const geo::Ring& r) {
      for (const auto& p : r) {
        if (hit) return;
        if (boxes[j].contains(p, snap) && geo::on_boundary(shapes[j], p, snap)) hit = true;
      }
    });
    return hit;
  };
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j) {
      if (m(i, j) != 0.0 || !boxes[i].intersects(boxes[j], snap)) continue;
      if (vertex_on_edge(i, j) || vertex_on_edge(j, i)) {
        m(i, j) = 1.0;
        m(j, i) = 1.0;
      }
    }
  out.weights = SpatialWeights(std::move(m));
  return out;
}

enum class Contiguity { rook, queen };

/// Regular rows × cols lattice, cells numbered row-major.
inline SpatialWeights lattice_weights(int rows, int cols, Contiguity rule) {
  std::vector<std::pair<int, int>> pairs;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      const int i = r * cols + c;
      for (int dr = -1; dr <= 1; ++dr)
        for (int dc = -1; dc <= 1; ++dc) {
          if (dr == 0 && dc == 0) continue;
          if (rule == Contiguity::rook && dr != 0 && dc != 0) continue;
          const int rr = r + dr, cc = c + dc;
          if (rr < 0 || rr >= rows || cc < 0 || cc >= cols) continue;
          const int j = rr * cols + cc;
          if (i < j) pairs.emplace_back(i, j);
        }
    }
  return SpatialWeights::from_pairs(rows * cols, pairs);
}

}  // namespace streetsafe::stats
