#pragma once

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

#include "streetsafe/errors.hpp"
#include "streetsafe/ols.hpp"

namespace streetsafe::stats {

struct Correlation {
  double r = 0.0;
  double p_value = 1.0;  ///< two-sided, t = r·sqrt((n−2)/(1−r²))
  int n = 0;
};

inline Correlation pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  if (a.size() != b.size()) throw InvalidInput("pearson: length mismatch");
  if (a.size() < 3) throw InvalidInput("pearson: need at least 3 pairs");
  const Eigen::VectorXd da = a.array() - a.mean();
  const Eigen::VectorXd db = b.array() - b.mean();
  const double saa = da.squaredNorm();
  const double sbb = db.squaredNorm();
  if (!(saa > 0.0) || !(sbb > 0.0)) throw DomainError("pearson: constant input");
  Correlation c;
  c.n = static_cast<int>(a.size());
  c.r = std::clamp(da.dot(db) / std::sqrt(saa * sbb), -1.0, 1.0);
  const int df = c.n - 2;
  const double one_minus = 1.0 - c.r * c.r;
  c.p_value = one_minus <= 0.0 ? 0.0 : two_sided_t_p(c.r * std::sqrt(df / one_minus), df);
  return c;
}

}  // namespace streetsafe::stats
