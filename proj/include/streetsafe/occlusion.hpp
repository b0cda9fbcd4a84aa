#pragma once

// Occlusion sensitivity: cover random square patches with the image's mean
// colour and attribute the score change to the covered pixels.
//
//   Δ = s(occluded) − s(original)
//   Δ < 0  → the patch held safety cues     → |Δ| added to positive_mask
//   Δ > 0  → the patch held unsafety cues   → |Δ| added to negative_mask
//
// Accumulators are divided by the number of trials covering each pixel.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "streetsafe/csv.hpp"
#include "streetsafe/errors.hpp"
#include "streetsafe/image.hpp"
#include "streetsafe/random.hpp"
#include "streetsafe/scorer.hpp"

namespace streetsafe::occlusion {

struct OcclusionConfig {
  int n_patches = 1000;
  /// Patch side, as a fraction of min(W, H).
  double min_size = 0.10;
  double max_size = 0.30;
  std::uint64_t seed = 0;
  /// Score every trial with crop averaging instead of a single full-image call.
  bool augmented = false;
  scorer::CropConfig crops;

  void validate() const {
    if (n_patches < 1) throw InvalidInput("n_patches must be >= 1");
    if (!(min_size > 0.0 && min_size <= max_size && max_size <= 1.0))
      throw InvalidInput("patch size range must satisfy 0 < min <= max <= 1");
  }
};

struct ContributionMasks {
  int width = 0;
  int height = 0;
  std::vector<double> positive;  ///< safety-contributing regions
  std::vector<double> negative;  ///< unsafety-contributing regions
  std::vector<int> trials;       ///< patches covering each pixel

  double pos(int x, int y) const { return positive[static_cast<std::size_t>(y) * width + x]; }
  double neg(int x, int y) const { return negative[static_cast<std::size_t>(y) * width + x]; }
  int count(int x, int y) const { return trials[static_cast<std::size_t>(y) * width + x]; }
};

struct Trial {
  PixelRect rect;
  double delta = 0.0;
};

struct SensitivityResult {
  double baseline = 0.0;
  ContributionMasks masks;
  std::vector<Trial> trials;
};

/// Per-channel mean colour, rounded to the nearest 8-bit value.
inline Rgb mean_color(const Image& image) {
  if (image.empty()) return {0, 0, 0};
  std::uint64_t sum[3] = {0, 0, 0};
  const auto& b = image.bytes();
  for (std::size_t i = 0; i < b.size(); i += 3) {
    sum[0] += b[i];
    sum[1] += b[i + 1];
    sum[2] += b[i + 2];
  }
  const double n = static_cast<double>(image.width()) * image.height();
  Rgb c;
  for (int k = 0; k < 3; ++k) c[k] = static_cast<std::uint8_t>(std::lround(static_cast<double>(sum[k]) / n));
  return c;
}

inline bool rect_within(const Image& image, const PixelRect& r) {
  return r.x1 >= 0 && r.y1 >= 0 && r.x1 <= r.x2 && r.y1 <= r.y2 && r.x2 <= image.width() &&
         r.y2 <= image.height();
}

/// Copy of `image` with `rect` replaced by the image's mean colour.
inline Image occlude(const Image& image, const PixelRect& rect) {
  if (!rect_within(image, rect)) throw InvalidInput("occlude: rectangle outside image");
  Image out = image;
  if (rect.area() == 0) return out;
  out.fill(rect, mean_color(image));
  return out;
}

/// Patch for trial `k`; each trial has its own seeded stream, so the first
/// N patches are the same whatever n_patches is.
inline PixelRect sample_patch(int width, int height, const OcclusionConfig& config, int k) {
  const int m = std::min(width, height);
  const int lo = std::max(1, static_cast<int>(std::ceil(config.min_size * m - 1e-9)));
  const int hi = std::max(lo, std::min(m, static_cast<int>(std::floor(config.max_size * m + 1e-9))));
  Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(k)));
  const int side = static_cast<int>(rng.uniform_int(lo, hi));
  const int x = static_cast<int>(rng.uniform_int(0, width - side));
  const int y = static_cast<int>(rng.uniform_int(0, height - side));
  return {x, y, x + side, y + side};
}

inline SensitivityResult sensitivity_map(const Image& image, scorer::Scorer& scorer, const OcclusionConfig& config,
                                         const std::string& image_id = {}) {
  config.validate();
  if (image.empty()) throw InvalidInput("sensitivity_map: empty image");
  auto evaluate = [&](const Image& img) {
    return config.augmented ? scorer::score_augmented(img, scorer, config.crops, image_id) : scorer.score(img);
  };

  SensitivityResult result;
  try {
    result.baseline = evaluate(image);
  } catch (const ScoringError& e) {
    throw ScoringError(std::string("baseline scoring failed: ") + e.what());
  }

  const Rgb fill = mean_color(image);
  result.trials.reserve(static_cast<std::size_t>(config.n_patches));
  for (int k = 0; k < config.n_patches; ++k) {
    const PixelRect rect = sample_patch(image.width(), image.height(), config, k);
    Image perturbed = image;
    perturbed.fill(rect, fill);
    double s;
    try {
      s = evaluate(perturbed);
    } catch (const ScoringError& e) {
      throw ScoringError(std::string("occlusion trial failed: ") + e.what(), k);
    }
    if (!std::isfinite(s)) throw ScoringError("occlusion trial returned a non-finite score", k);
    result.trials.push_back({rect, s - result.baseline});
  }

  auto& m = result.masks;
  m.width = image.width();
  m.height = image.height();
  const std::size_t npx = static_cast<std::size_t>(m.width) * m.height;
  m.positive.assign(npx, 0.0);
  m.negative.assign(npx, 0.0);
  m.trials.assign(npx, 0);
  for (const auto& t : result.trials) {
    auto& target = t.delta < 0.0 ? m.positive : m.negative;
    const double mag = std::abs(t.delta);
    for (int y = t.rect.y1; y < t.rect.y2; ++y)
      for (int x = t.rect.x1; x < t.rect.x2; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * m.width + x;
        ++m.trials[i];
        if (mag > 0.0) target[i] += mag;
      }
  }
  for (std::size_t i = 0; i < npx; ++i) {
    if (m.trials[i] > 0) {
      m.positive[i] /= m.trials[i];
      m.negative[i] /= m.trials[i];
    }
  }
  return result;
}

/// Mask scaled so its maximum maps to 255.
inline std::vector<std::uint8_t> to_gray(const std::vector<double>& mask) {
  const double hi = mask.empty() ? 0.0 : *std::max_element(mask.begin(), mask.end());
  std::vector<std::uint8_t> out(mask.size(), 0);
  if (!(hi > 0.0)) return out;
  for (std::size_t i = 0; i < mask.size(); ++i)
    out[i] = static_cast<std::uint8_t>(std::lround(255.0 * mask[i] / hi));
  return out;
}

inline std::string trials_csv(const SensitivityResult& r) {
  csv::Writer w({"trial", "x1", "y1", "x2", "y2", "delta"});
  for (std::size_t k = 0; k < r.trials.size(); ++k) {
    const auto& t = r.trials[k];
    w.row({std::to_string(k), std::to_string(t.rect.x1), std::to_string(t.rect.y1), std::to_string(t.rect.x2),
           std::to_string(t.rect.y2), csv::format_number(t.delta)});
  }
  return w.str();
}

}  // namespace streetsafe::occlusion
