#pragma once

// Spatially filtered OLS: z-score the data, fit, then greedily add Griffith
// eigenvectors that most reduce the residual Moran's I until the residual
// autocorrelation is no longer significant.

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "streetsafe/errors.hpp"
#include "streetsafe/griffith.hpp"
#include "streetsafe/moran.hpp"
#include "streetsafe/ols.hpp"
#include "streetsafe/random.hpp"
#include "streetsafe/transform.hpp"
#include "streetsafe/weights.hpp"

namespace streetsafe::stats {

struct StepwiseConfig {
  /// Stop once the residual Moran's I permutation p-value exceeds this.
  double stop_p = 0.10;
  int n_permutations = 999;
  /// Candidate eigenvectors satisfy λₖ/λ₁ > candidate_ratio.
  double candidate_ratio = 0.25;
  std::uint64_t seed = 0;
  int jobs = 1;
  bool standardize = true;
  bool row_standardize = false;
  std::optional<int> max_eigenvectors;

  void validate() const {
    if (!(stop_p >= 0.0 && stop_p <= 1.0)) throw InvalidInput("stop_p must be in [0,1]");
    if (n_permutations < 1) throw InvalidInput("n_permutations must be >= 1");
    if (jobs < 1) throw InvalidInput("jobs must be >= 1");
  }
};

struct RegressionResult {
  std::vector<Coefficient> coefficients;  ///< substantive covariates only
  Coefficient intercept;
  double r2 = 0.0;
  double adj_r2 = 0.0;
  int n = 0;
  std::vector<int> selected;  ///< Griffith eigenvector indices, in selection order
  int candidates = 0;
  MoranResult initial_moran;   ///< residuals before filtering
  MoranResult residual_moran;  ///< residuals of the final model

  int n_eigenvectors_selected() const { return static_cast<int>(selected.size()); }

  const Coefficient& operator[](const std::string& name) const {
    for (const auto& c : coefficients)
      if (c.name == name) return c;
    throw InvalidInput("no coefficient named " + name);
  }
};

namespace detail {

/// Residual Moran's I; residuals that vanish (perfect fit) or a graph
/// without links carry no autocorrelation.
inline MoranResult residual_moran(const Eigen::VectorXd& residuals, double scale2, const SpatialWeights& w,
                                  int n_perm, std::uint64_t seed, int jobs) {
  const double n = static_cast<double>(residuals.size());
  const Eigen::VectorXd z = residuals.array() - residuals.mean();
  if (!(w.s0() != 0.0) || z.squaredNorm() <= 1e-24 * scale2) {
    MoranResult m;
    m.expected = -1.0 / (n - 1.0);
    m.I = m.expected;
    m.p_value = 1.0;
    m.n_permutations = n_perm;
    return m;
  }
  return morans_i(residuals, w, n_perm, seed, jobs);
}

inline double moran_distance(const Eigen::VectorXd& residuals, double scale2, const SpatialWeights& w) {
  const Eigen::VectorXd z = residuals.array() - residuals.mean();
  if (!(w.s0() != 0.0) || z.squaredNorm() <= 1e-24 * scale2) return 0.0;
  const double n = static_cast<double>(residuals.size());
  const double I = n / w.s0() * w.quadratic_form(z) / z.squaredNorm();
  return std::abs(I + 1.0 / (n - 1.0));
}

}  // namespace detail

inline RegressionResult stepwise_filter_regress(const Eigen::VectorXd& y_raw, const Eigen::MatrixXd& X_raw,
                                                const std::vector<std::string>& names, const SpatialWeights& weights,
                                                const StepwiseConfig& config = {}) {
  config.validate();
  const int n = static_cast<int>(y_raw.size());
  if (X_raw.rows() != n) throw InvalidInput("stepwise: rows(X) != length(y)");
  if (weights.n() != n) throw InvalidInput("stepwise: weights size does not match data");
  if (static_cast<int>(names.size()) != X_raw.cols()) throw InvalidInput("stepwise: names do not match columns");

  Eigen::VectorXd y = y_raw;
  Eigen::MatrixXd X = X_raw;
  if (config.standardize) {
    try {
      y = zscore(y_raw);
    } catch (const DomainError&) {
      throw DomainError("stepwise: dependent variable has zero variance");
    }
    for (Eigen::Index j = 0; j < X.cols(); ++j) {
      try {
        X.col(j) = zscore(X_raw.col(j));
      } catch (const DomainError&) {
        throw RankDeficient("stepwise: covariate '" + names[static_cast<std::size_t>(j)] +
                            "' is constant (collinear with the intercept)");
      }
    }
  }
  const double scale2 = (y.array() - y.mean()).square().sum();

  const SpatialWeights moran_w = config.row_standardize ? weights.row_standardized() : weights;
  const GriffithBasis basis = griffith_basis(moran_w);
  std::vector<int> pool = candidate_pool(basis, config.candidate_ratio);

  RegressionResult result;
  result.n = n;
  result.candidates = static_cast<int>(pool.size());

  auto design = [&](const std::vector<int>& sel) {
    Eigen::MatrixXd D(n, X.cols() + static_cast<Eigen::Index>(sel.size()));
    D.leftCols(X.cols()) = X;
    for (std::size_t s = 0; s < sel.size(); ++s) D.col(X.cols() + static_cast<Eigen::Index>(s)) = basis.eigenvectors.col(sel[s]);
    return D;
  };
  auto labels = [&](const std::vector<int>& sel) {
    std::vector<std::string> l = names;
    for (int k : sel) l.push_back("ev" + std::to_string(k + 1));
    return l;
  };

  std::vector<int> selected;
  OlsResult fit = ols(y, design(selected), labels(selected));
  int step = 0;
  MoranResult moran = detail::residual_moran(fit.residuals, scale2, moran_w, config.n_permutations,
                                             derive_seed(config.seed, static_cast<std::uint64_t>(step)), config.jobs);
  result.initial_moran = moran;

  while (!pool.empty() && moran.p_value <= config.stop_p &&
         (!config.max_eigenvectors || static_cast<int>(selected.size()) < *config.max_eigenvectors) &&
         n - (X.cols() + static_cast<int>(selected.size()) + 1) > 1) {
    // Residuals after adding candidate e: r − (e⊥ᵀr / e⊥ᵀe⊥)·e⊥, e⊥ = e − QQᵀe.
    Eigen::MatrixXd D(n, X.cols() + static_cast<Eigen::Index>(selected.size()) + 1);
    D.col(0).setOnes();
    D.rightCols(D.cols() - 1) = design(selected);
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(D);
    const Eigen::MatrixXd Q = qr.householderQ() * Eigen::MatrixXd::Identity(n, D.cols());

    const double current = detail::moran_distance(fit.residuals, scale2, moran_w);
    double best = std::numeric_limits<double>::infinity();
    std::size_t best_pos = pool.size();
    for (std::size_t c = 0; c < pool.size(); ++c) {
      const Eigen::VectorXd e = basis.eigenvectors.col(pool[c]);
      const Eigen::VectorXd e_perp = e - Q * (Q.transpose() * e);
      const double ee = e_perp.squaredNorm();
      if (ee <= 1e-12) continue;  // already spanned by the design
      const Eigen::VectorXd r = fit.residuals - (e_perp.dot(fit.residuals) / ee) * e_perp;
      const double d = detail::moran_distance(r, scale2, moran_w);
      if (d < best) {
        best = d;
        best_pos = c;
      }
    }
    if (best_pos == pool.size() || !(best < current)) break;

    selected.push_back(pool[best_pos]);
    pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(best_pos));
    fit = ols(y, design(selected), labels(selected));
    ++step;
    moran = detail::residual_moran(fit.residuals, scale2, moran_w, config.n_permutations,
                                   derive_seed(config.seed, static_cast<std::uint64_t>(step)), config.jobs);
  }

  result.selected = selected;
  result.residual_moran = moran;
  result.r2 = fit.r2;
  result.adj_r2 = fit.adj_r2;
  result.intercept = fit.coefficients.front();
  for (std::size_t j = 0; j < names.size(); ++j) result.coefficients.push_back(fit.coefficients[j + 1]);
  return result;
}

}  // namespace streetsafe::stats
