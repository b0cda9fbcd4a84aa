#include <gtest/gtest.h>

#include <algorithm>

#include "streetsafe/occlusion.hpp"

using namespace streetsafe;
using namespace streetsafe::occlusion;

namespace {

Image noise_image(int w, int h, std::uint64_t seed) {
  Image img(w, h);
  Rng rng(seed);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      img.set(x, y, {static_cast<std::uint8_t>(rng.uniform_int(0, 200)), static_cast<std::uint8_t>(rng.uniform_int(0, 255)),
                     static_cast<std::uint8_t>(rng.uniform_int(0, 200))});
  return img;
}

struct BoxScene {
  Image image;
  PixelRect box;
};

BoxScene box_scene() {
  BoxScene s{noise_image(120, 100, 3), {70, 20, 100, 45}};
  s.image.fill(s.box, scorer::kDefaultMarker);
  return s;
}

std::unique_ptr<scorer::Scorer> box_scorer(const PixelRect& box) {
  return scorer::synthetic_scorer("region-box:255,0,255:" + std::to_string(box.area()));
}

}  // namespace

TEST(Occlude, FullRectGivesMeanColour) {
  const auto img = noise_image(31, 17, 1);
  const auto out = occlude(img, {0, 0, 31, 17});
  // Independent mean per channel.
  double sum[3] = {0, 0, 0};
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 31; ++x)
      for (int c = 0; c < 3; ++c) sum[c] += img.at(x, y)[c];
  for (int y = 0; y < 17; ++y)
    for (int x = 0; x < 31; ++x)
      for (int c = 0; c < 3; ++c) EXPECT_EQ(out.at(x, y)[c], std::lround(sum[c] / (31 * 17)));
}

TEST(Occlude, PartialRectLeavesOtherPixelsIdentical) {
  const auto img = noise_image(40, 30, 2);
  const PixelRect r{5, 7, 19, 12};
  const auto out = occlude(img, r);
  const Rgb mean = mean_color(img);
  for (int y = 0; y < 30; ++y)
    for (int x = 0; x < 40; ++x) EXPECT_EQ(out.at(x, y), r.contains(x, y) ? mean : img.at(x, y));
}

TEST(Occlude, TrivialCasesAndBounds) {
  const auto img = noise_image(10, 10, 4);
  EXPECT_EQ(occlude(img, {3, 3, 3, 8}).bytes(), img.bytes());
  Image flat(12, 9);
  flat.fill({0, 0, 12, 9}, {17, 99, 201});
  EXPECT_EQ(occlude(flat, {2, 2, 8, 8}).bytes(), flat.bytes());
  EXPECT_THROW(occlude(img, {5, 5, 11, 6}), InvalidInput);
  EXPECT_THROW(occlude(img, {-1, 0, 3, 3}), InvalidInput);
  EXPECT_THROW(occlude(img, {6, 0, 3, 3}), InvalidInput);
}

TEST(Sensitivity, ConstantScorerGivesZeroMasks) {
  scorer::ConstantScorer c(6.0);
  OcclusionConfig cfg;
  cfg.n_patches = 300;
  const auto r = sensitivity_map(noise_image(50, 40, 5), c, cfg);
  EXPECT_TRUE(std::all_of(r.masks.positive.begin(), r.masks.positive.end(), [](double v) { return v == 0.0; }));
  EXPECT_TRUE(std::all_of(r.masks.negative.begin(), r.masks.negative.end(), [](double v) { return v == 0.0; }));
  EXPECT_DOUBLE_EQ(r.baseline, 6.0);
}

TEST(Sensitivity, PatchSizesAndUncoveredPixels) {
  OcclusionConfig cfg;
  cfg.n_patches = 20;
  cfg.seed = 8;
  scorer::GreenMeanScorer g;
  const auto img = noise_image(200, 100, 6);
  const auto r = sensitivity_map(img, g, cfg);
  std::vector<int> covered(200 * 100, 0);
  for (const auto& t : r.trials) {
    EXPECT_EQ(t.rect.width(), t.rect.height());
    EXPECT_GE(t.rect.width(), 10);
    EXPECT_LE(t.rect.width(), 30);
    EXPECT_TRUE(rect_within(img, t.rect));
    for (int y = t.rect.y1; y < t.rect.y2; ++y)
      for (int x = t.rect.x1; x < t.rect.x2; ++x) ++covered[y * 200 + x];
  }
  for (int i = 0; i < 200 * 100; ++i) {
    EXPECT_EQ(r.masks.trials[i], covered[i]);
    if (covered[i] == 0) {
      EXPECT_EQ(r.masks.positive[i], 0.0);
      EXPECT_EQ(r.masks.negative[i], 0.0);
    }
    EXPECT_GE(r.masks.positive[i], 0.0);
    EXPECT_GE(r.masks.negative[i], 0.0);
  }
}

TEST(Sensitivity, SignConvention) {
  // Score = 10 × mean green; a bright green square raises it, so occluding
  // the square lowers the score and shows up in the positive mask.
  Image img(60, 60);
  img.fill({0, 0, 60, 60}, {0, 40, 0});
  img.fill({10, 10, 25, 25}, {0, 255, 0});
  scorer::GreenMeanScorer g;
  OcclusionConfig cfg;
  cfg.n_patches = 500;
  const auto r = sensitivity_map(img, g, cfg);
  EXPECT_GT(r.masks.pos(17, 17), 0.0);
  EXPECT_EQ(r.masks.neg(17, 17), 0.0);
  // Occluding dark background with the (brighter) mean colour raises the score.
  EXPECT_GT(r.masks.neg(50, 50), 0.0);
  EXPECT_EQ(r.masks.pos(50, 50), 0.0);
}

TEST(Sensitivity, RegionBoxSupportAndSeparation) {
  const auto scene = box_scene();
  auto s = box_scorer(scene.box);
  OcclusionConfig cfg;
  cfg.n_patches = 10000;
  cfg.seed = 21;
  const auto r = sensitivity_map(scene.image, *s, cfg);
  EXPECT_DOUBLE_EQ(r.baseline, 10.0);
  const int m = std::min(scene.image.width(), scene.image.height());
  const int dilation = static_cast<int>(cfg.max_size * m) - 1;
  const PixelRect grown{scene.box.x1 - dilation, scene.box.y1 - dilation, scene.box.x2 + dilation,
                        scene.box.y2 + dilation};
  double in = 0, out = 0;
  long n_in = 0, n_out = 0;
  for (int y = 0; y < r.masks.height; ++y)
    for (int x = 0; x < r.masks.width; ++x) {
      EXPECT_EQ(r.masks.neg(x, y), 0.0);
      if (r.masks.pos(x, y) > 0.0) {
        EXPECT_TRUE(grown.contains(x, y)) << x << "," << y;
      }
      if (scene.box.contains(x, y)) {
        EXPECT_GT(r.masks.pos(x, y), 0.0);
        in += r.masks.pos(x, y), ++n_in;
      } else {
        out += r.masks.pos(x, y), ++n_out;
      }
    }
  EXPECT_GE(in / n_in, 5.0 * out / n_out);
}

TEST(Sensitivity, DoublingPatchesKeepsExpectedMask) {
  const auto scene = box_scene();
  auto s = box_scorer(scene.box);
  OcclusionConfig cfg;
  cfg.seed = 4;
  cfg.n_patches = 3000;
  const auto a = sensitivity_map(scene.image, *s, cfg);
  cfg.n_patches = 6000;
  const auto b = sensitivity_map(scene.image, *s, cfg);
  // The first 3000 trials are shared.
  for (int k = 0; k < 3000; ++k) EXPECT_EQ(a.trials[k].rect, b.trials[k].rect);
  auto box_mean = [&](const ContributionMasks& m) {
    double sum = 0;
    for (int y = scene.box.y1; y < scene.box.y2; ++y)
      for (int x = scene.box.x1; x < scene.box.x2; ++x) sum += m.pos(x, y);
    return sum / static_cast<double>(scene.box.area());
  };
  EXPECT_NEAR(box_mean(a.masks), box_mean(b.masks), 0.05 * box_mean(b.masks));
}

TEST(Sensitivity, OrderInvariance) {
  // Re-accumulating the recorded trials in reverse gives the same masks.
  const auto scene = box_scene();
  auto s = box_scorer(scene.box);
  OcclusionConfig cfg;
  cfg.n_patches = 400;
  const auto r = sensitivity_map(scene.image, *s, cfg);
  std::vector<double> pos(r.masks.positive.size(), 0.0);
  std::vector<int> cnt(pos.size(), 0);
  for (auto it = r.trials.rbegin(); it != r.trials.rend(); ++it)
    for (int y = it->rect.y1; y < it->rect.y2; ++y)
      for (int x = it->rect.x1; x < it->rect.x2; ++x) {
        ++cnt[y * r.masks.width + x];
        if (it->delta < 0) pos[y * r.masks.width + x] += -it->delta;
      }
  for (std::size_t i = 0; i < pos.size(); ++i)
    EXPECT_NEAR(r.masks.positive[i], cnt[i] ? pos[i] / cnt[i] : 0.0, 1e-12);
}

TEST(Sensitivity, FailingTrialReportsIndex) {
  int calls = 0;
  scorer::FunctionScorer f([&](const Image&) -> double {
    if (calls++ == 8) throw ScoringError("scorer died");
    return 5.0;
  });
  OcclusionConfig cfg;
  cfg.n_patches = 20;
  try {
    sensitivity_map(noise_image(30, 30, 1), f, cfg);
    FAIL();
  } catch (const ScoringError& e) {
    EXPECT_EQ(e.index(), 7);  // call 0 is the baseline
  }
  cfg.n_patches = 0;
  scorer::ConstantScorer c(1);
  EXPECT_THROW(sensitivity_map(noise_image(30, 30, 1), c, cfg), InvalidInput);
}

TEST(Sensitivity, AugmentedModeAndCsv) {
  const auto scene = box_scene();
  auto s = scorer::synthetic_scorer("constant:3");
  OcclusionConfig cfg;
  cfg.n_patches = 5;
  cfg.augmented = true;
  cfg.crops.n = 3;
  const auto r = sensitivity_map(scene.image, *s, cfg, "img");
  EXPECT_DOUBLE_EQ(r.baseline, 3.0);
  const auto csv = trials_csv(r);
  EXPECT_EQ(csv.substr(0, csv.find('\n')), "trial,x1,y1,x2,y2,delta");
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(to_gray({0.0, 0.5, 1.0}), (std::vector<std::uint8_t>{0, 128, 255}));
  EXPECT_EQ(to_gray({0.0, 0.0}), (std::vector<std::uint8_t>{0, 0}));
}
