#pragma once

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/distributions/students_t.hpp>

#include "streetsafe/errors.hpp"

namespace streetsafe::stats {

struct Coefficient {
  std::string name;
  double beta = 0.0;
  double std_error = 0.0;
  double t = 0.0;
  double p_value = 1.0;
};

struct OlsResult {
  std::vector<Coefficient> coefficients;  ///< intercept first when fitted
  double r2 = 0.0;
  double adj_r2 = 0.0;
  double rss = 0.0;
  int n = 0;
  int df = 0;  ///< residual degrees of freedom
  Eigen::VectorXd fitted;
  Eigen::VectorXd residuals;

  const Coefficient& operator[](const std::string& name) const {
    for (const auto& c : coefficients)
      if (c.name == name) return c;
    throw InvalidInput("no coefficient named " + name);
  }
};

inline double two_sided_t_p(double t, int df) {
  if (df <= 0 || std::isnan(t)) return std::numeric_limits<double>::quiet_NaN();
  if (std::isinf(t)) return 0.0;
  const boost::math::students_t dist(df);
  return 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(t)));
}

/**
 * Least squares via column-pivoted QR. The intercept (when requested) is
 * added internally as the first column; `names` labels the columns of X.
 * Classical covariance σ²(XᵀX)⁻¹; adjusted R² counts the regressors of X.
 */
inline OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& X, const std::vector<std::string>& names,
                     bool intercept = true) {
  const int n = static_cast<int>(y.size());
  if (X.rows() != n) throw InvalidInput("ols: rows(X) != length(y)");
  if (static_cast<int>(names.size()) != X.cols()) throw InvalidInput("ols: names do not match columns");
  if (!y.allFinite() || !X.allFinite()) throw InvalidInput("ols: non-finite input");

  const int p = static_cast<int>(X.cols());
  const int k = p + (intercept ? 1 : 0);
  if (n < k) throw RankDeficient("ols: fewer observations than parameters");
  Eigen::MatrixXd D(n, k);
  std::vector<std::string> labels;
  if (intercept) {
    D.col(0).setOnes();
    labels.push_back("(intercept)");
  }
  D.rightCols(p) = X;
  labels.insert(labels.end(), names.begin(), names.end());

  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(D);
  // Relative threshold on column norms: exact collinearity shows up around 1e-15.
  qr.setThreshold(1e-10);
  if (qr.rank() < k) {
    std::string bad;
    const auto& perm = qr.colsPermutation().indices();
    for (int i = static_cast<int>(qr.rank()); i < k; ++i) {
      if (!bad.empty()) bad += ", ";
      bad += labels[static_cast<std::size_t>(perm[i])];
    }
    throw RankDeficient("ols: rank-deficient design; collinear column(s): " + bad);
  }

  const Eigen::VectorXd beta = qr.solve(y);
  OlsResult r;
  r.n = n;
  r.df = n - k;
  r.fitted = D * beta;
  r.residuals = y - r.fitted;
  r.rss = r.residuals.squaredNorm();
  const double tss = intercept ? (y.array() - y.mean()).square().sum() : y.squaredNorm();
  if (!(tss > 0.0)) throw DomainError("ols: dependent variable has zero variance");
  r.r2 = 1.0 - r.rss / tss;
  r.adj_r2 = r.df > 0 ? 1.0 - (1.0 - r.r2) * (n - (intercept ? 1 : 0)) / r.df
                      : std::numeric_limits<double>::quiet_NaN();

  // (DᵀD)⁻¹ = P R⁻¹ R⁻ᵀ Pᵀ
  const Eigen::MatrixXd R = qr.matrixR().topLeftCorner(k, k).template triangularView<Eigen::Upper>();
  const Eigen::MatrixXd Rinv = R.template triangularView<Eigen::Upper>().solve(Eigen::MatrixXd::Identity(k, k));
  const Eigen::MatrixXd inv_perm = Rinv * Rinv.transpose();
  const auto& perm = qr.colsPermutation().indices();
  Eigen::VectorXd var(k);
  for (int i = 0; i < k; ++i) var[perm[i]] = inv_perm(i, i);

  const double sigma2 = r.df > 0 ? r.rss / r.df : std::numeric_limits<double>::quiet_NaN();
  for (int i = 0; i < k; ++i) {
    Coefficient c;
    c.name = labels[static_cast<std::size_t>(i)];
    c.beta = beta[i];
    c.std_error = std::sqrt(sigma2 * var[i]);
    c.t = c.std_error > 0.0 ? c.beta / c.std_error
                            : (c.beta == 0.0 ? 0.0 : std::copysign(INFINITY, c.beta));
    c.p_value = two_sided_t_p(c.t, r.df);
    r.coefficients.push_back(std::move(c));
  }
  return r;
}

}  // namespace streetsafe::stats
