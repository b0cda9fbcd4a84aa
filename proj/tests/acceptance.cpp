// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include <unistd.h>

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "streetsafe/occlusion.hpp"
#include "streetsafe/pipeline.hpp"
#include "streetsafe/ranking.hpp"
#include "streetsafe/stepwise.hpp"
#include "support/oracles.hpp"
#include "support/synthetic_city.hpp"

using namespace streetsafe;
namespace fs = std::filesystem;

namespace {

struct Verdict {
  bool pass = true;
  std::ostringstream detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      if (pass) detail << "failed: ";
      else detail << "; ";
      detail << what;
      pass = false;
    }
  }
};

struct Criterion {
  std::string name;
  double time_limit_s;  ///< 0 = no limit
  std::function<void(Verdict&)> body;
};

Eigen::VectorXd normal_vector(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

Eigen::MatrixXd normal_matrix(Rng& rng, int n, int p) {
  Eigen::MatrixXd X(n, p);
  for (int j = 0; j < p; ++j) X.col(j) = normal_vector(rng, n);
  return X;
}

double sd(const Eigen::VectorXd& v) {
  return std::sqrt((v.array() - v.mean()).square().sum() / static_cast<double>(v.size() - 1));
}

geo::MultiPolygon metric_rect(double x0, double y0, double w, double h) {
  const geo::LocalProjection proj(9.19, 45.46);
  const auto lo = proj.inverse({x0, y0}), hi = proj.inverse({x0 + w, y0 + h});
  return {geo::rectangle(lo.lon, lo.lat, hi.lon, hi.lat)};
}

void moran_oracle(Verdict& v) {
  Rng rng(101);
  double worst = 0;
  for (int trial = 0; trial < 2000; ++trial) {
    const int n = static_cast<int>(rng.uniform_int(2, 8));
    Eigen::MatrixXd W = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j)
        if (rng.uniform(0, 1) < 0.5) W(i, j) = W(j, i) = 1;
    if (W.sum() == 0) W(0, 1) = W(1, 0) = 1;
    const auto x = normal_vector(rng, n);
    worst = std::max(worst, std::abs(stats::morans_i(x, stats::SpatialWeights(W), 0).I - oracle::morans_i(x, W)));
  }
  Eigen::VectorXd board(4);
  board << 1, -1, -1, 1;
  const double I = stats::morans_i(board, stats::lattice_weights(2, 2, stats::Contiguity::rook), 0).I;
  v.detail << "max |I - oracle| = " << worst << " over 2000 graphs, checkerboard I = " << I;
  v.require(worst <= 1e-12, "oracle tolerance");
  v.require(I == -1.0, "checkerboard");
}

void griffith_invariants(Verdict& v) {
  Rng rng(202);
  double gram = 0, sums = 0, moran = 0;
  int lattices = 0;
  std::vector<std::pair<int, int>> shapes{{10, 10}, {4, 25}, {1, 2}};
  for (int k = 0; k < 12; ++k) {
    const int R = static_cast<int>(rng.uniform_int(1, 10));
    const int C = static_cast<int>(rng.uniform_int(R == 1 ? 2 : 1, 100 / R));
    shapes.emplace_back(R, C);
  }
  for (auto [R, C] : shapes) {
    const auto w = stats::lattice_weights(R, C, stats::Contiguity::queen);
    const auto b = stats::griffith_basis(w);
    const int n = R * C;
    const Eigen::MatrixXd E = b.eigenvectors;
    Eigen::MatrixXd G = E.transpose() * E;
    gram = std::max(gram, (G - Eigen::MatrixXd::Identity(G.rows(), G.cols())).cwiseAbs().maxCoeff());
    sums = std::max(sums, E.colwise().sum().cwiseAbs().maxCoeff());
    for (int j = 0; j < b.size(); ++j)
      moran = std::max(moran, std::abs(oracle::morans_i(E.col(j), w.matrix()) - n / w.s0() * b.eigenvalues[j]));
    ++lattices;
  }
  v.detail << lattices << " lattices, max Gram error " << gram << ", max |sum| " << sums << ", max I(v) error "
           << moran;
  v.require(gram < 1e-9, "orthonormality");
  v.require(sums < 1e-9, "zero sums");
  v.require(moran < 1e-9, "Moran identity");
}

void stepwise_recovery(Verdict& v) {
  Rng rng(303);
  const int side = 15, n = side * side;
  const auto w = stats::lattice_weights(side, side, stats::Contiguity::queen);
  const auto basis = stats::griffith_basis(w);
  const Eigen::MatrixXd X = normal_matrix(rng, n, 2);
  const Eigen::Vector2d b(0.6, -0.4);
  Eigen::VectorXd spatial =
      2.0 * basis.eigenvectors.col(0) - 1.5 * basis.eigenvectors.col(1) + basis.eigenvectors.col(3);
  spatial *= 0.5 * std::sqrt(static_cast<double>(n));
  const Eigen::VectorXd y = X * b + spatial + 0.3 * normal_vector(rng, n);
  stats::StepwiseConfig cfg;
  cfg.seed = 17;
  cfg.jobs = 4;
  cfg.n_permutations = 999;
  const auto r = stats::stepwise_filter_regress(y, X, {"x1", "x2"}, w, cfg);
  double worst = 0;
  for (int j = 0; j < 2; ++j) {
    const double planted = b[j] * sd(X.col(j)) / sd(y);
    worst = std::max(worst, std::abs(r.coefficients[j].beta - planted));
  }
  v.detail << "Moran p " << r.initial_moran.p_value << " -> " << r.residual_moran.p_value << " with "
           << r.n_eigenvectors_selected() << " eigenvectors, max |beta - planted| = " << worst;
  v.require(r.initial_moran.p_value < 0.01, "initial p");
  v.require(r.residual_moran.p_value > 0.10, "residual p");
  v.require(worst <= 0.05, "beta recovery");
}

void ols_oracle(Verdict& v) {
  Rng rng(404);
  double worst = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = static_cast<int>(rng.uniform_int(1, 10));
    const int n = static_cast<int>(rng.uniform_int(p + 5, 200));
    const Eigen::MatrixXd X = normal_matrix(rng, n, p);
    const Eigen::VectorXd y = X * normal_vector(rng, p) + normal_vector(rng, n);
    std::vector<std::string> names;
    for (int j = 0; j < p; ++j) names.push_back("x" + std::to_string(j));
    const auto fit = stats::ols(y, X, names);
    const auto ref = oracle::ols_normal_equations(y, X);
    for (int j = 0; j <= p; ++j) {
      worst = std::max(worst, std::abs(fit.coefficients[j].beta - ref.beta[j]));
      worst = std::max(worst, std::abs(fit.coefficients[j].std_error - ref.std_error[j]));
    }
    worst = std::max(worst, std::abs(fit.adj_r2 - ref.adj_r2));
  }
  const Eigen::MatrixXd X = normal_matrix(rng, 30, 3);
  const Eigen::VectorXd y = (X * Eigen::Vector3d(1, -2, 0.5)).array() + 4.0;
  const double perfect = stats::ols(y, X, {"a", "b", "c"}).adj_r2;
  v.detail << "max deviation " << worst << " over 100 designs, perfect-fit adj R2 = " << perfect;
  v.require(worst <= 1e-10, "oracle tolerance");
  v.require(std::abs(perfect - 1.0) < 1e-12, "perfect fit");
}

void trueskill_oracle(Verdict& v) {
  Rng rng(505);
  ranking::RatingConfig cfg;
  double worst = 0;
  for (int k = 0; k < 100; ++k) {
    const ranking::Rating a{rng.uniform(10, 40), rng.uniform(0.5, 9)}, b{rng.uniform(10, 40), rng.uniform(0.5, 9)};
    const auto [wa, wb] = ranking::update_ratings(a, b, ranking::Outcome::left_wins, cfg);
    const auto [oa, ob] = oracle::trueskill_update({a.mu, a.sigma}, {b.mu, b.sigma}, false, cfg.beta, cfg.tau,
                                                   cfg.draw_probability);
    worst = std::max({worst, std::abs(wa.mu - oa.mu), std::abs(wa.sigma - oa.sigma), std::abs(wb.mu - ob.mu),
                      std::abs(wb.sigma - ob.sigma)});
  }
  ranking::RatingConfig no_draws;
  no_draws.draw_probability = 0.0;
  const ranking::Rating fresh{25.0, 25.0 / 3.0};
  const auto [w, l] = ranking::update_ratings(fresh, fresh, ranking::Outcome::left_wins, no_draws);
  const auto [ow, ol] = oracle::trueskill_update({25, 25.0 / 3}, {25, 25.0 / 3}, false, no_draws.beta, 0.0, 0.0);
  v.detail << "max deviation " << worst << " over 100 pairs, fresh win " << w.mu << "/" << l.mu << " (oracle "
           << ow.mu << "/" << ol.mu << ")";
  v.require(worst <= 1e-6, "oracle tolerance");
  v.require(std::abs(w.mu - ow.mu) <= 1e-6 && std::abs(l.mu - ol.mu) <= 1e-6, "fresh pair vs oracle");
  v.require(std::abs(w.mu - 29.2) < 0.05 && std::abs(l.mu - 20.8) < 0.05 && w.mu + l.mu == 50.0, "29.2/20.8 split");
}

void crop_bounds(Verdict& v) {
  scorer::CropConfig cfg;
  cfg.n = 100000;
  cfg.seed = 606;
  const scorer::ImageMeta meta{1000, 1000};
  long violations = 0;
  double lo = 1, hi = 0;
  for (const auto& c : scorer::generate_crops(meta, cfg, "acceptance")) {
    // Integer form of k1 <= x1/W <= k2 and k1 <= 1 - x2/W <= k2 at W = H = 1000.
    violations += !(c.x1 >= 50 && c.x1 <= 200 && c.y1 >= 50 && c.y1 <= 200);
    violations += !(c.x2 >= 800 && c.x2 <= 950 && c.y2 >= 800 && c.y2 <= 950);
    const double f = static_cast<double>(c.area()) / 1e6;
    lo = std::min(lo, f), hi = std::max(hi, f);
  }
  v.detail << violations << " violations in 100000 crops, area fraction in [" << lo << ", " << hi << "]";
  v.require(violations == 0, "bounds");
  v.require(lo >= 0.36 && hi <= 0.81, "area fraction");
}

void grid_counts(Verdict& v) {
  const auto km2 = geodata::generate_grid(metric_rect(0, 0, 1000, 1000), 100.0).size();
  Rng rng(707);
  int misses = 0;
  const int trials = 500;
  for (int k = 0; k < trials; ++k) {
    const double w = rng.uniform(50, 3000), h = std::clamp(rng.uniform(50, 3000), w / 10, w * 10);
    const double density = rng.uniform(1, 400);
    const auto pts = geodata::generate_grid(metric_rect(rng.uniform(-5e3, 5e3), rng.uniform(-5e3, 5e3), w, h), density);
    const double expected = density * w * h / 1e6;
    misses += std::abs(static_cast<double>(pts.size()) - expected) > 2.0 * std::sqrt(expected) + 4.0;
  }
  v.detail << "1 km2 at density 100 -> " << km2 << " points, " << misses << "/" << trials
           << " rectangles (aspect <= 10) outside the count bound";
  v.require(km2 == 100, "exact count");
  v.require(misses == 0, "count bound");
}

void occlusion_harness(Verdict& v) {
  Image img(120, 100);
  Rng rng(808);
  for (int y = 0; y < 100; ++y)
    for (int x = 0; x < 120; ++x)
      img.set(x, y, {static_cast<std::uint8_t>(rng.uniform_int(0, 200)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                     static_cast<std::uint8_t>(rng.uniform_int(0, 200))});
  const PixelRect box{70, 20, 100, 45};
  img.fill(box, scorer::kDefaultMarker);
  auto s = scorer::synthetic_scorer("region-box:255,0,255:" + std::to_string(box.area()));
  occlusion::OcclusionConfig cfg;
  cfg.n_patches = 10000;
  cfg.seed = 909;
  const auto r = occlusion::sensitivity_map(img, *s, cfg);
  const int dil = static_cast<int>(cfg.max_size * std::min(img.width(), img.height())) - 1;
  const PixelRect grown{box.x1 - dil, box.y1 - dil, box.x2 + dil, box.y2 + dil};
  long outside_support = 0;
  double in = 0, out = 0;
  long n_in = 0, n_out = 0;
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const double p = r.masks.pos(x, y);
      outside_support += p > 0.0 && !grown.contains(x, y);
      if (box.contains(x, y)) in += p, ++n_in;
      else out += p, ++n_out;
    }
  const double ratio = (in / n_in) / (out / n_out);

  scorer::ConstantScorer constant(5.0);
  cfg.n_patches = 1000;
  const auto c = occlusion::sensitivity_map(img, constant, cfg);
  const bool zeros = std::all_of(c.masks.positive.begin(), c.masks.positive.end(), [](double x) { return x == 0.0; }) &&
                     std::all_of(c.masks.negative.begin(), c.masks.negative.end(), [](double x) { return x == 0.0; });
  v.detail << outside_support << " support pixels outside the dilated box, in/out ratio " << ratio
           << ", constant scorer masks " << (zeros ? "all zero" : "nonzero");
  v.require(outside_support == 0, "containment");
  v.require(ratio >= 5.0, "separation");
  v.require(zeros, "constant scorer");
}

void synthetic_city(Verdict& v) {
  const fs::path dir = fs::temp_directory_path() / ("streetsafe_acceptance_" + std::to_string(::getpid()));
  fs::remove_all(dir);
  const auto files = synthetic::write_city(synthetic::make_city(), dir);
  auto c = pipeline::read_config(files.config);
  c.jobs = 4;
  pipeline::apply_seed(c);
  pipeline::score(c).commit();
  c.records = c.out / "records.csv";
  pipeline::aggregate(c).commit();
  pipeline::metrics(c).commit();
  c.districts = c.out / "districts_scored.geojson";
  c.metrics = c.out / "metrics.csv";
  const auto run = pipeline::regress(c);
  fs::remove_all(dir);

  const std::map<std::string, int> expected_sign{{"people", 1}, {"women", 1}, {"young", -1}, {"elderly", 1}};
  for (const auto& [file, content] : run.outputs()) {
    if (!file.ends_with(".json")) continue;
    const auto j = nlohmann::json::parse(content);
    const std::string name = j.at("name");
    for (const auto& coef : j.at("coefficients")) {
      if (coef.at("name") != "safety") continue;
      const double beta = coef.at("beta"), p = coef.at("p_value");
      v.detail << name << " beta " << beta << " (p " << p << ", n " << j.value("n", 0) << ") ";
      const int want = expected_sign.at(name);
      v.require((beta > 0 ? 1 : -1) == want && p < 0.01, name + " safety effect");
    }
  }
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {"moran: matches brute-force oracle (n <= 8) and checkerboard I = -1", 1.0, moran_oracle},
      {"griffith: orthonormal, zero-sum eigenvectors with I(v) = (n/S0) lambda up to n = 100", 10.0,
       griffith_invariants},
      {"stepwise: 15x15 lattice residual p from < 0.01 to > 0.10, planted betas within 0.05", 60.0,
       stepwise_recovery},
      {"ols: normal-equations oracle on 100 designs, perfect fit adj R2 = 1", 0.0, ols_oracle},
      {"trueskill: quadrature oracle on 100 pairs and the 29.2/20.8 fresh-pair split", 0.0, trueskill_oracle},
      {"crops: 1e5 crops within bounds, area fraction in [0.36, 0.81]", 0.0, crop_bounds},
      {"grid: 100 points per km2 and the boundary-term count bound", 0.0, grid_counts},
      {"occlusion: support containment, 5x separation, constant scorer gives zero masks", 0.0, occlusion_harness},
      {"synthetic city: all four safety coefficient signs recovered with p < 0.01", 0.0, synthetic_city},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Verdict v;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(v);
    } catch (const std::exception& e) {
      v.require(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      std::ostringstream msg;
      msg << "runtime over " << c.time_limit_s << " s";
      v.require(false, msg.str());
    }
    failures += !v.pass;
    std::printf("%s  %s [%.2f s] %s\n", v.pass ? "PASS" : "FAIL", c.name.c_str(), secs, v.detail.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
