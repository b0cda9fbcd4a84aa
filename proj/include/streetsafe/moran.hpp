#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <thread>
#include <vector>

#include <Eigen/Dense>

#include "streetsafe/errors.hpp"
#include "streetsafe/random.hpp"
#include "streetsafe/weights.hpp"

namespace streetsafe::stats {

struct MoranResult {
  double I = 0.0;
  double expected = 0.0;  ///< -1/(n-1)
  double p_value = 1.0;   ///< two-sided permutation pseudo p-value
  int n_permutations = 0;
};

/// I = (n/S0)·(zᵀWz)/(zᵀz), z = x − mean(x). Throws DomainError for a
/// constant vector or a weights matrix without any links.
inline double morans_statistic(const Eigen::VectorXd& x, const SpatialWeights& w) {
  const auto n = x.size();
  if (n != w.n()) throw InvalidInput("morans_i: vector length does not match weights");
  if (n < 2) throw DomainError("morans_i: need at least two observations");
  if (!(w.s0() != 0.0)) throw DomainError("morans_i: weights have no links (S0 = 0)");
  const Eigen::VectorXd z = x.array() - x.mean();
  const double denom = z.squaredNorm();
  if (!(denom > 0.0)) throw DomainError("morans_i: zero variance");
  return static_cast<double>(n) / w.s0() * w.quadratic_form(z) / denom;
}

/**
 * Moran's I with a permutation test. Permutation k shuffles a fresh copy of
 * `x` with a generator seeded from (seed, k), so the result does not depend
 * on `jobs`.
 */
inline MoranResult morans_i(const Eigen::VectorXd& x, const SpatialWeights& w, int n_permutations,
                            std::uint64_t seed = 0, int jobs = 1) {
  if (n_permutations < 0) throw InvalidInput("morans_i: negative permutation count");
  MoranResult r;
  r.I = morans_statistic(x, w);
  const auto n = x.size();
  r.expected = -1.0 / static_cast<double>(n - 1);
  r.n_permutations = n_permutations;
  if (n_permutations == 0) {
    r.p_value = 1.0;
    return r;
  }

  // Centre once; permuting z is equivalent to permuting x.
  const Eigen::VectorXd z = x.array() - x.mean();
  const double denom = z.squaredNorm();
  const double scale = static_cast<double>(n) / w.s0() / denom;
  const double observed = std::abs(r.I - r.expected);
  const double tol = 1e-12 * std::max(1.0, observed);

  auto count_range = [&](int begin, int end) {
    long hits = 0;
    Eigen::VectorXd p(n);
    for (int k = begin; k < end; ++k) {
      p = z;
      Rng rng(derive_seed(seed, static_cast<std::uint64_t>(k)));
      rng.shuffle(p.data(), p.data() + n);
      const double Ip = scale * w.quadratic_form(p);
      if (std::abs(Ip - r.expected) >= observed - tol) ++hits;
    }
    return hits;
  };

  long hits = 0;
  jobs = std::max(1, std::min(jobs, n_permutations));
  if (jobs == 1) {
    hits = count_range(0, n_permutations);
  } else {
    std::vector<long> partial(static_cast<std::size_t>(jobs), 0);
    std::vector<std::thread> threads;
    for (int t = 0; t < jobs; ++t) {
      const int b = static_cast<int>(static_cast<long>(n_permutations) * t / jobs);
      const int e = static_cast<int>(static_cast<long>(n_permutations) * (t + 1) / jobs);
      threads.emplace_back([&, t, b, e] { partial[static_cast<std::size_t>(t)] = count_range(b, e); });
    }
    for (auto& th : threads) th.join();
    for (long h : partial) hits += h;
  }
  r.p_value = static_cast<double>(1 + hits) / static_cast<double>(1 + n_permutations);
  return r;
}

}  // namespace streetsafe::stats
