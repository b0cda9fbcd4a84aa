#include <gtest/gtest.h>

#include <cmath>
#include <limits>

#include "streetsafe/random.hpp"
#include "streetsafe/ranking.hpp"
#include "support/oracles.hpp"

using namespace streetsafe;
using namespace streetsafe::ranking;

namespace {

RatingConfig no_draws() {
  RatingConfig c;
  c.draw_probability = 0.0;
  return c;
}

}  // namespace

TEST(UpdateRatings, MatchesQuadratureOracleOnRandomPairs) {
  Rng rng(77);
  for (double dp : {0.0, 0.10}) {
    RatingConfig config;
    config.draw_probability = dp;
    for (int k = 0; k < 100; ++k) {
      const Rating a{rng.uniform(10, 40), rng.uniform(0.5, 9)};
      const Rating b{rng.uniform(10, 40), rng.uniform(0.5, 9)};
      const auto [wa, wb] = update_ratings(a, b, Outcome::left_wins, config);
      const auto [oa, ob] = oracle::trueskill_update({a.mu, a.sigma}, {b.mu, b.sigma}, false, config.beta,
                                                     config.tau, dp);
      EXPECT_NEAR(wa.mu, oa.mu, 1e-6);
      EXPECT_NEAR(wa.sigma, oa.sigma, 1e-6);
      EXPECT_NEAR(wb.mu, ob.mu, 1e-6);
      EXPECT_NEAR(wb.sigma, ob.sigma, 1e-6);
      if (dp > 0.0) {
        const auto [da, db] = update_ratings(a, b, Outcome::draw, config);
        const auto [qa, qb] = oracle::trueskill_update({a.mu, a.sigma}, {b.mu, b.sigma}, true, config.beta,
                                                       config.tau, dp);
        EXPECT_NEAR(da.mu, qa.mu, 1e-6);
        EXPECT_NEAR(da.sigma, qa.sigma, 1e-6);
        EXPECT_NEAR(db.mu, qb.mu, 1e-6);
        EXPECT_NEAR(db.sigma, qb.sigma, 1e-6);
      }
    }
  }
}

TEST(UpdateRatings, FreshPairWinSplit) {
  const Rating fresh{25.0, 25.0 / 3.0};
  const auto [w, l] = update_ratings(fresh, fresh, Outcome::left_wins, no_draws());
  const auto [ow, ol] = oracle::trueskill_update({25, 25.0 / 3}, {25, 25.0 / 3}, false, 25.0 / 6, 0.0, 0.0);
  EXPECT_NEAR(w.mu, ow.mu, 1e-6);
  EXPECT_NEAR(l.mu, ol.mu, 1e-6);
  EXPECT_NEAR(w.mu, 29.2, 0.05);
  EXPECT_NEAR(l.mu, 20.8, 0.05);
  EXPECT_NEAR(w.mu + l.mu, 50.0, 1e-12);
  EXPECT_NEAR(w.sigma, l.sigma, 1e-12);
}

TEST(UpdateRatings, WinMovesMeansAndShrinksSigmas) {
  Rng rng(5);
  for (int k = 0; k < 50; ++k) {
    const Rating a{rng.uniform(0, 50), rng.uniform(1, 8)};
    const Rating b{rng.uniform(0, 50), rng.uniform(1, 8)};
    const auto [w, l] = update_ratings(a, b, Outcome::left_wins, RatingConfig{});
    EXPECT_GT(w.mu, a.mu);
    EXPECT_LT(l.mu, b.mu);
    EXPECT_LT(w.sigma, a.sigma);
    EXPECT_LT(l.sigma, b.sigma);
  }
}

TEST(UpdateRatings, DrawBetweenEqualsKeepsMeans) {
  const Rating r{25.0, 25.0 / 3.0};
  const auto [a, b] = update_ratings(r, r, Outcome::draw, RatingConfig{});
  EXPECT_DOUBLE_EQ(a.mu, 25.0);
  EXPECT_DOUBLE_EQ(b.mu, 25.0);
  EXPECT_LT(a.sigma, r.sigma);
  EXPECT_LT(b.sigma, r.sigma);
}

TEST(UpdateRatings, SwapSymmetry) {
  const Rating a{27.0, 4.0}, b{22.0, 6.5};
  const auto [x1, y1] = update_ratings(a, b, Outcome::left_wins, RatingConfig{});
  const auto [y2, x2] = update_ratings(b, a, Outcome::right_wins, RatingConfig{});
  EXPECT_EQ(x1.mu, x2.mu);
  EXPECT_EQ(x1.sigma, x2.sigma);
  EXPECT_EQ(y1.mu, y2.mu);
  EXPECT_EQ(y1.sigma, y2.sigma);
}

TEST(UpdateRatings, RejectsBadInput) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  const double inf = std::numeric_limits<double>::infinity();
  EXPECT_THROW(update_ratings({nan, 1}, {25, 1}, Outcome::left_wins, RatingConfig{}), InvalidInput);
  EXPECT_THROW(update_ratings({25, inf}, {25, 1}, Outcome::left_wins, RatingConfig{}), InvalidInput);
  EXPECT_THROW(update_ratings({25, 0}, {25, 1}, Outcome::left_wins, RatingConfig{}), InvalidInput);
  EXPECT_THROW(update_ratings({25, 1}, {25, 1}, Outcome::draw, no_draws()), InvalidInput);
  RatingConfig bad;
  bad.beta = 0;
  EXPECT_THROW(update_ratings({25, 1}, {25, 1}, Outcome::left_wins, bad), InvalidInput);
}

TEST(UpdateRatings, TauInflatesBeforeUpdate) {
  RatingConfig c;
  c.tau = 0.5;
  c.draw_probability = 0.0;
  const auto [w, l] = update_ratings({25, 3}, {25, 3}, Outcome::left_wins, c);
  const auto [ow, ol] = oracle::trueskill_update({25, 3}, {25, 3}, false, c.beta, 0.5, 0.0);
  EXPECT_NEAR(w.mu, ow.mu, 1e-6);
  EXPECT_NEAR(w.sigma, ow.sigma, 1e-6);
  EXPECT_NEAR(l.sigma, ol.sigma, 1e-6);
}

TEST(ScoreImages, EmptyVotes) {
  const auto r = score_images({}, RatingConfig{});
  EXPECT_TRUE(r.scores.empty());
  EXPECT_TRUE(r.rejected.empty());
}

TEST(ScoreImages, DominanceAndCycle) {
  std::vector<Comparison> dom(10, Comparison{"A", "B", Outcome::left_wins});
  const auto d = score_images(dom, RatingConfig{});
  EXPECT_DOUBLE_EQ(d.scores.at("A").score, 10.0);
  EXPECT_DOUBLE_EQ(d.scores.at("B").score, 0.0);
  EXPECT_GT(d.scores.at("A").rating.mu, d.scores.at("B").rating.mu);

  const std::vector<Comparison> rps{{"A", "B", Outcome::left_wins},
                                    {"B", "C", Outcome::left_wins},
                                    {"C", "A", Outcome::left_wins}};
  const auto c = score_images(rps, RatingConfig{});
  ASSERT_EQ(c.scores.size(), 3u);
  // Spread measured on the pre-scaling conservative values.
  double lo = 1e9, hi = -1e9;
  for (const auto& [id, s] : c.scores) {
    EXPECT_TRUE(std::isfinite(s.score));
    EXPECT_GE(s.score, 0.0);
    EXPECT_LE(s.score, 10.0);
    lo = std::min(lo, belief_value(s.rating, ScoreBasis::conservative));
    hi = std::max(hi, belief_value(s.rating, ScoreBasis::conservative));
  }
  const double dom_spread = belief_value(d.scores.at("A").rating, ScoreBasis::conservative) -
                            belief_value(d.scores.at("B").rating, ScoreBasis::conservative);
  EXPECT_LT(hi - lo, dom_spread);
}

TEST(ScoreImages, SelfVoteRejectedPerVote) {
  const std::vector<Comparison> v{{"A", "A", Outcome::left_wins}, {"A", "B", Outcome::left_wins}};
  const auto r = score_images(v, RatingConfig{});
  ASSERT_EQ(r.rejected.size(), 1u);
  EXPECT_EQ(r.rejected[0].index, 0u);
  EXPECT_EQ(r.scores.size(), 2u);
}

TEST(ScoreImages, AllEqualMapsToFive) {
  const auto r = score_images({{"A", "B", Outcome::draw}}, RatingConfig{});
  EXPECT_DOUBLE_EQ(r.scores.at("A").score, 5.0);
  EXPECT_DOUBLE_EQ(r.scores.at("B").score, 5.0);
}

TEST(ScoreImages, RelabelingPermutesOutput) {
  const std::vector<Comparison> v{{"a", "b", Outcome::left_wins}, {"c", "a", Outcome::draw},
                                  {"b", "c", Outcome::right_wins}, {"d", "a", Outcome::left_wins}};
  std::map<std::string, std::string> rename{{"a", "zz"}, {"b", "00"}, {"c", "m"}, {"d", "q1"}};
  std::vector<Comparison> w;
  for (const auto& c : v) w.push_back({rename[c.left_id], rename[c.right_id], c.outcome});
  const auto r1 = score_images(v, RatingConfig{});
  const auto r2 = score_images(w, RatingConfig{});
  for (const auto& [id, s] : r1.scores) {
    EXPECT_DOUBLE_EQ(s.score, r2.scores.at(rename[id]).score);
    EXPECT_DOUBLE_EQ(s.rating.mu, r2.scores.at(rename[id]).rating.mu);
  }
}

TEST(ScoreImages, StarTournamentWinnerIsUniqueMaximum) {
  for (int k = 1; k <= 6; ++k) {
    std::vector<Comparison> v;
    for (int i = 0; i < k; ++i) v.push_back({"X", "o" + std::to_string(i), Outcome::left_wins});
    const auto r = score_images(v, RatingConfig{});
    for (const auto& [id, s] : r.scores)
      if (id != "X") {
        EXPECT_LT(s.score, r.scores.at("X").score);
      }
  }
}

TEST(ScoreImages, MeanBasisAndSweeps) {
  const std::vector<Comparison> v{{"A", "B", Outcome::left_wins}, {"B", "C", Outcome::left_wins},
                                  {"A", "C", Outcome::draw}, {"C", "D", Outcome::left_wins}};
  RatingConfig mean;
  mean.basis = ScoreBasis::mean;
  const auto r = score_images(v, mean);
  double lo = 1e9, hi = -1e9;
  std::string top;
  for (const auto& [id, s] : r.scores) {
    lo = std::min(lo, s.rating.mu);
    if (s.rating.mu > hi) hi = s.rating.mu, top = id;
  }
  EXPECT_DOUBLE_EQ(r.scores.at(top).score, 10.0);
  for (const auto& [id, s] : r.scores) EXPECT_NEAR(s.score, 10.0 * (s.rating.mu - lo) / (hi - lo), 1e-12);

  RatingConfig sweeps;
  sweeps.sweeps = 4;
  sweeps.seed = 11;
  const auto s1 = score_images(v, sweeps);
  const auto s2 = score_images(v, sweeps);
  for (const auto& [id, s] : s1.scores) EXPECT_EQ(s.rating.mu, s2.scores.at(id).rating.mu);
  EXPECT_LT(s1.scores.at("A").rating.sigma, score_images(v, RatingConfig{}).scores.at("A").rating.sigma);
}

TEST(Rescale, IdempotentOnScaledVectors) {
  const std::vector<double> x{0.0, 2.5, 10.0, 7.25};
  EXPECT_EQ(rescale_0_10(x), x);
  EXPECT_EQ(rescale_0_10({3.0, 3.0}), (std::vector<double>{5.0, 5.0}));
  EXPECT_TRUE(rescale_0_10({}).empty());
}

TEST(VotesCsv, ParsesOutcomes) {
  const auto t = csv::Table::parse("left_id,right_id,outcome\na,b,left\nb,c,right\nc,a,equal\n", "votes.csv");
  const auto v = parse_votes(t);
  ASSERT_EQ(v.size(), 3u);
  EXPECT_EQ(v[0].outcome, Outcome::left_wins);
  EXPECT_EQ(v[1].outcome, Outcome::right_wins);
  EXPECT_EQ(v[2].outcome, Outcome::draw);
}

TEST(VotesCsv, SchemaErrorsNameFileAndField) {
  try {
    parse_votes(csv::Table::parse("left_id,right,outcome\na,b,left\n", "votes.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.file(), "votes.csv");
    EXPECT_EQ(e.field(), "right_id");
  }
  try {
    parse_votes(csv::Table::parse("left_id,right_id,outcome\na,b,tie\n", "votes.csv"));
    FAIL();
  } catch (const SchemaError& e) {
    EXPECT_EQ(e.field(), "outcome");
  }
}

TEST(VotesCsv, ScoresCsvLayout) {
  const auto r = score_images({{"A", "B", Outcome::left_wins}}, RatingConfig{});
  const std::string s = scores_csv(r);
  EXPECT_EQ(s.substr(0, s.find('\n')), "image_id,mu,sigma,score");
  EXPECT_NE(s.find("\nA,"), std::string::npos);
}
