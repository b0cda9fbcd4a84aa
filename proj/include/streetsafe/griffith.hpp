#pragma once

// Eigenvector spatial filters: eigenpairs of the doubly-centred weights
// matrix M·W·M, M = I − 11ᵀ/n. The constant vector is always in the kernel
// of M·W·M; the basis spans its orthogonal complement, so every eigenvector
// sums to zero and has Moran's I = (n/S0)·λ.

#include <cmath>
#include <vector>

#include <Eigen/Dense>

#include "streetsafe/errors.hpp"
#include "streetsafe/weights.hpp"

namespace streetsafe::stats {

struct GriffithBasis {
  Eigen::VectorXd eigenvalues;   ///< descending, length n−1
  Eigen::MatrixXd eigenvectors;  ///< n × (n−1), orthonormal columns

  int size() const { return static_cast<int>(eigenvalues.size()); }
};

/// Orthonormal n × (n−1) basis of {v : Σv = 0}, from the Householder
/// reflection that maps e₁ to 1/√n.
inline Eigen::MatrixXd centered_basis(int n) {
  Eigen::VectorXd v = Eigen::VectorXd::Constant(n, 1.0 / std::sqrt(static_cast<double>(n)));
  v[0] -= 1.0;
  const double vv = v.squaredNorm();
  Eigen::MatrixXd H = Eigen::MatrixXd::Identity(n, n);
  if (vv > 0.0) H -= 2.0 / vv * v * v.transpose();
  return H.rightCols(n - 1);
}

inline GriffithBasis griffith_basis(const SpatialWeights& w) {
  const int n = w.n();
  if (n < 2) throw InvalidInput("griffith_basis: need n >= 2");
  // Symmetrise so row-standardised weights still yield a real spectrum.
  const Eigen::MatrixXd W = 0.5 * (w.matrix() + w.matrix().transpose());
  const Eigen::MatrixXd Q = centered_basis(n);
  const Eigen::MatrixXd reduced = Q.transpose() * W * Q;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(0.5 * (reduced + reduced.transpose()));
  if (solver.info() != Eigen::Success) throw Error("griffith_basis: eigendecomposition failed");

  GriffithBasis basis;
  basis.eigenvalues = solver.eigenvalues().reverse();
  basis.eigenvectors = Q * solver.eigenvectors().rowwise().reverse();
  for (int k = 0; k < basis.eigenvectors.cols(); ++k) {
    auto col = basis.eigenvectors.col(k);
    col.normalize();
    for (int i = 0; i < n; ++i) {
      if (std::abs(col[i]) > 1e-10) {
        if (col[i] < 0.0) col = -col;
        break;
      }
    }
  }
  return basis;
}

/// Indices of eigenvectors with λₖ/λ₁ above `ratio` (positive autocorrelation
/// candidates). Empty when λ₁ ≤ 0.
inline std::vector<int> candidate_pool(const GriffithBasis& basis, double ratio) {
  std::vector<int> pool;
  if (basis.size() == 0 || !(basis.eigenvalues[0] > 0.0)) return pool;
  const double top = basis.eigenvalues[0];
  for (int k = 0; k < basis.size(); ++k)
    if (basis.eigenvalues[k] / top > ratio) pool.push_back(k);
  return pool;
}

}  // namespace streetsafe::stats
