#pragma once

#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "streetsafe/errors.hpp"

namespace streetsafe::stats {

enum class Transform { none, log, cube_root, zscore };

inline Transform parse_transform(std::string_view s) {
  if (s.empty() || s == "none") return Transform::none;
  if (s == "log") return Transform::log;
  if (s == "cube_root" || s == "cbrt") return Transform::cube_root;
  if (s == "zscore") return Transform::zscore;
  throw InvalidInput("unknown transform '" + std::string(s) + "'");
}

inline std::string_view to_string(Transform t) {
  switch (t) {
    case Transform::none: return "none";
    case Transform::log: return "log";
    case Transform::cube_root: return "cube_root";
    case Transform::zscore: return "zscore";
  }
  return "none";
}

/// (x − mean)/sd with the sample (n−1) standard deviation.
inline Eigen::VectorXd zscore(const Eigen::VectorXd& x) {
  const auto n = x.size();
  if (n < 2) throw DomainError("zscore: need at least two values");
  const double mean = x.mean();
  const Eigen::VectorXd c = x.array() - mean;
  const double sd = std::sqrt(c.squaredNorm() / static_cast<double>(n - 1));
  if (!(sd > 0.0)) throw DomainError("zscore: zero variance");
  return c / sd;
}

/**
 * Elementwise transform. `log_offset` gives log(x + ε) for data with zero
 * counts; without it every value must be positive. Cube root keeps the sign.
 */
inline Eigen::VectorXd transform(const Eigen::VectorXd& x, Transform kind, double log_offset = 0.0) {
  switch (kind) {
    case Transform::none:
      return x;
    case Transform::log: {
      Eigen::VectorXd out(x.size());
      for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double v = x[i] + log_offset;
        if (!(v > 0.0))
          throw DomainError("log transform of nonpositive value " + std::to_string(x[i]) +
                            (log_offset != 0.0 ? " (with offset)" : ""));
        out[i] = std::log(v);
      }
      return out;
    }
    case Transform::cube_root:
      return x.unaryExpr([](double v) { return std::cbrt(v); });
    case Transform::zscore:
      return zscore(x);
  }
  return x;
}

}  // namespace streetsafe::stats
