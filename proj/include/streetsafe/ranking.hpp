#pragma once

// Pairwise "which place looks safer?" votes to per-image scores with a
// one-vs-one TrueSkill update (Gaussian belief, moment-matched truncated
// performance difference).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "streetsafe/csv.hpp"
#include "streetsafe/errors.hpp"
#include "streetsafe/random.hpp"

namespace streetsafe::ranking {

struct Rating {
  double mu = 25.0;
  double sigma = 25.0 / 3.0;
};

enum class Outcome { left_wins, right_wins, draw };

struct Comparison {
  std::string left_id;
  std::string right_id;
  Outcome outcome = Outcome::left_wins;
};

/// Which belief summary is rescaled to [0,10].
enum class ScoreBasis {
  conservative,  ///< mu - 3 sigma
  mean,          ///< raw mu
};

struct RatingConfig {
  double mu0 = 25.0;
  double sigma0 = 25.0 / 3.0;
  double beta = 25.0 / 6.0;
  double tau = 0.0;
  double draw_probability = 0.10;
  ScoreBasis basis = ScoreBasis::conservative;
  /// Number of passes over the votes. The first pass is in input order,
  /// later passes visit a seeded shuffle.
  int sweeps = 1;
  std::uint64_t seed = 0;

  void validate() const {
    if (!(sigma0 > 0.0) || !std::isfinite(sigma0)) throw InvalidInput("sigma0 must be > 0");
    if (!(beta > 0.0) || !std::isfinite(beta)) throw InvalidInput("beta must be > 0");
    if (!(tau >= 0.0) || !std::isfinite(tau)) throw InvalidInput("tau must be >= 0");
    if (!(draw_probability >= 0.0 && draw_probability < 1.0))
      throw InvalidInput("draw_probability must be in [0,1)");
    if (!std::isfinite(mu0)) throw InvalidInput("mu0 must be finite");
    if (sweeps < 1) throw InvalidInput("sweeps must be >= 1");
  }
};

namespace detail {

inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

inline double pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }
inline double cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

/// Additive mean correction for a win, phi(x)/Phi(x) with x = t - eps.
inline double v_win(double t, double eps) {
  const double x = t - eps;
  const double denom = cdf(x);
  if (denom < 1e-300) return -x;  // asymptote of the inverse Mills ratio
  return pdf(x) / denom;
}

inline double w_win(double t, double eps) {
  const double x = t - eps;
  const double denom = cdf(x);
  if (denom < 1e-300) return x < 0.0 ? 1.0 : 0.0;
  const double v = v_win(t, eps);
  return v * (v + x);
}

inline double v_draw(double t, double eps) {
  const double a = std::abs(t);
  const double denom = cdf(eps - a) - cdf(-eps - a);
  if (denom < 1e-300) return t < 0.0 ? a - eps : eps - a;
  const double v = (pdf(-eps - a) - pdf(eps - a)) / denom;
  return t < 0.0 ? -v : v;
}

inline double w_draw(double t, double eps) {
  const double a = std::abs(t);
  const double denom = cdf(eps - a) - cdf(-eps - a);
  if (denom < 1e-300) return 1.0;
  const double v = v_draw(a, eps);
  return v * v + ((eps - a) * pdf(eps - a) + (eps + a) * pdf(eps + a)) / denom;
}

}  // namespace detail

/// Draw margin for a one-vs-one match.
inline double draw_margin(const RatingConfig& config) {
  if (config.draw_probability <= 0.0) return 0.0;
  const boost::math::normal_distribution<double> unit;
  return boost::math::quantile(unit, (config.draw_probability + 1.0) / 2.0) * std::sqrt(2.0) *
         config.beta;
}

/**
 * One-vs-one TrueSkill update.
 *
 * `first` is the winner and `second` the loser unless `outcome` is a draw, in
 * which case the roles are symmetric. Outcome::right_wins swaps the roles, so
 * callers may pass (left, right, outcome) straight from a Comparison. Returns
 * the updated (first, second) pair in argument order.
 */
inline std::pair<Rating, Rating> update_ratings(const Rating& first, const Rating& second,
                                                Outcome outcome, const RatingConfig& config) {
  config.validate();
  for (double v : {first.mu, first.sigma, second.mu, second.sigma}) {
    if (!std::isfinite(v)) throw InvalidInput("update_ratings: non-finite rating");
  }
  if (!(first.sigma > 0.0) || !(second.sigma > 0.0))
    throw InvalidInput("update_ratings: sigma must be > 0");
  if (outcome == Outcome::draw && config.draw_probability <= 0.0)
    throw InvalidInput("update_ratings: draw outcome needs draw_probability > 0");
  if (outcome == Outcome::right_wins) {
    auto [b, a] = update_ratings(second, first, Outcome::left_wins, config);
    return {a, b};
  }

  const double var_a = first.sigma * first.sigma + config.tau * config.tau;
  const double var_b = second.sigma * second.sigma + config.tau * config.tau;
  const double c2 = 2.0 * config.beta * config.beta + var_a + var_b;
  const double c = std::sqrt(c2);
  const double t = (first.mu - second.mu) / c;
  const double eps = draw_margin(config) / c;

  double v, w;
  if (outcome == Outcome::draw) {
    v = detail::v_draw(t, eps);
    w = detail::w_draw(t, eps);
  } else {
    v = detail::v_win(t, eps);
    w = detail::w_win(t, eps);
  }

  Rating a, b;
  a.mu = first.mu + var_a / c * v;
  b.mu = second.mu - var_b / c * v;
  a.sigma = std::sqrt(var_a * std::max(1.0 - var_a / c2 * w, std::numeric_limits<double>::min()));
  b.sigma = std::sqrt(var_b * std::max(1.0 - var_b / c2 * w, std::numeric_limits<double>::min()));
  return {a, b};
}

struct ImageScore {
  Rating rating;
  double score = 0.0;  ///< in [0,10]
};

struct VoteError {
  std::size_t index;  ///< position in the vote sequence
  std::string message;
};

struct ScoringReport {
  std::map<std::string, ImageScore> scores;
  std::vector<VoteError> rejected;
};

/// Affine min->0, max->10 rescale; all-equal input maps to 5.
inline std::vector<double> rescale_0_10(const std::vector<double>& values) {
  if (values.empty()) return {};
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  const double min = *lo, max = *hi;
  std::vector<double> out(values.size(), 5.0);
  if (!(max > min)) return out;
  for (std::size_t i = 0; i < values.size(); ++i) {
    out[i] = std::clamp(10.0 * (values[i] - min) / (max - min), 0.0, 10.0);
  }
  return out;
}

inline double belief_value(const Rating& r, ScoreBasis basis) {
  return basis == ScoreBasis::conservative ? r.mu - 3.0 * r.sigma : r.mu;
}

/**
 * Sequentially rates every image mentioned in `votes` and rescales the
 * chosen belief summary to [0,10]. Votes comparing an image with itself are
 * skipped and reported.
 */
inline ScoringReport score_images(const std::vector<Comparison>& votes, const RatingConfig& config) {
  config.validate();
  ScoringReport report;
  std::map<std::string, Rating> ratings;
  std::vector<std::size_t> valid;
  valid.reserve(votes.size());
  for (std::size_t i = 0; i < votes.size(); ++i) {
    const auto& v = votes[i];
    if (v.left_id == v.right_id) {
      report.rejected.push_back({i, "vote compares image '" + v.left_id + "' with itself"});
      continue;
    }
    if (v.outcome == Outcome::draw && config.draw_probability <= 0.0) {
      report.rejected.push_back({i, "draw vote with draw_probability = 0"});
      continue;
    }
    valid.push_back(i);
  }

  const Rating prior{config.mu0, config.sigma0};
  Rng rng(derive_seed(config.seed, std::string_view("ranking-sweeps")));
  std::vector<std::size_t> order = valid;
  for (int sweep = 0; sweep < config.sweeps; ++sweep) {
    if (sweep > 0) rng.shuffle(order.begin(), order.end());
    for (std::size_t i : order) {
      const auto& v = votes[i];
      Rating& left = ratings.try_emplace(v.left_id, prior).first->second;
      Rating& right = ratings.try_emplace(v.right_id, prior).first->second;
      auto [l, r] = update_ratings(left, right, v.outcome, config);
      left = l;
      right = r;
    }
  }

  std::vector<double> values;
  values.reserve(ratings.size());
  for (const auto& [id, r] : ratings) values.push_back(belief_value(r, config.basis));
  const auto scaled = rescale_0_10(values);
  std::size_t k = 0;
  for (const auto& [id, r] : ratings) report.scores.emplace(id, ImageScore{r, scaled[k++]});
  return report;
}

// --- CSV interfaces -------------------------------------------------------

/// Reads `left_id,right_id,outcome` with outcome in {left,right,equal}.
inline std::vector<Comparison> parse_votes(const csv::Table& table) {
  const auto li = table.column("left_id");
  const auto ri = table.column("right_id");
  const auto oi = table.column("outcome");
  std::vector<Comparison> votes;
  votes.reserve(table.size());
  for (std::size_t r = 0; r < table.size(); ++r) {
    const auto& row = table.rows()[r];
    Comparison c{row[li], row[ri], Outcome::left_wins};
    const std::string& o = row[oi];
    if (o == "left") c.outcome = Outcome::left_wins;
    else if (o == "right") c.outcome = Outcome::right_wins;
    else if (o == "equal") c.outcome = Outcome::draw;
    else
      throw SchemaError(table.source(), "outcome",
                        "row " + std::to_string(r + 1) + ": expected left|right|equal, got '" + o + "'");
    if (c.left_id.empty() || c.right_id.empty())
      throw SchemaError(table.source(), c.left_id.empty() ? "left_id" : "right_id",
                        "row " + std::to_string(r + 1) + ": empty image id");
    votes.push_back(std::move(c));
  }
  return votes;
}

inline std::string scores_csv(const ScoringReport& report) {
  csv::Writer w({"image_id", "mu", "sigma", "score"});
  for (const auto& [id, s] : report.scores) {
    w.row({id, csv::format_number(s.rating.mu), csv::format_number(s.rating.sigma),
           csv::format_number(s.score)});
  }
  return w.str();
}

}  // namespace streetsafe::ranking
