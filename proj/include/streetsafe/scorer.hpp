#pragma once

// Black-box image scorers, random-crop geometry and crop-averaged scoring.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "streetsafe/errors.hpp"
#include "streetsafe/image.hpp"
#include "streetsafe/random.hpp"

namespace streetsafe::scorer {

struct ImageMeta {
  int width = 0;
  int height = 0;
};

/// Crop bounds: each of x1/W, y1/H, 1-x2/W, 1-y2/H must lie in [k1, k2].
struct CropConfig {
  double k1 = 0.05;
  double k2 = 0.2;
  int n = 30;
  std::uint64_t seed = 0;
  /// Optional diversity constraint: redraw a crop whose IoU with an earlier
  /// crop exceeds this value. Not enforced by default.
  std::optional<double> max_iou;
  int max_redraws = 100;

  void validate() const {
    if (!(k1 >= 0.0 && k1 <= k2 && k2 < 0.5)) throw InvalidInput("crop bounds need 0 <= k1 <= k2 < 0.5");
    if (n < 1) throw InvalidInput("crop count n must be >= 1");
    if (max_iou && !(*max_iou > 0.0 && *max_iou <= 1.0)) throw InvalidInput("max_iou must be in (0,1]");
  }
};

/// Integer range for one axis; lo > hi when the axis is too short.
struct AxisRange {
  long start_lo, start_hi;  // x1 range
  long end_lo, end_hi;      // x2 range
};

namespace detail {
inline constexpr double kBoundSlack = 1e-9;
}

inline AxisRange crop_axis_range(int length, double k1, double k2) {
  const double L = length;
  AxisRange r;
  r.start_lo = static_cast<long>(std::ceil(k1 * L - detail::kBoundSlack));
  r.start_hi = static_cast<long>(std::floor(k2 * L + detail::kBoundSlack));
  r.end_lo = static_cast<long>(std::ceil((1.0 - k2) * L - detail::kBoundSlack));
  r.end_hi = static_cast<long>(std::floor((1.0 - k1) * L + detail::kBoundSlack));
  return r;
}

/// Exact check of the four bound inequalities for a crop.
inline bool crop_within_bounds(const PixelRect& c, const ImageMeta& meta, double k1, double k2) {
  auto in = [&](double v) { return v >= k1 - detail::kBoundSlack && v <= k2 + detail::kBoundSlack; };
  const double W = meta.width, H = meta.height;
  return c.x1 < c.x2 && c.y1 < c.y2 && in(c.x1 / W) && in(c.y1 / H) && in(1.0 - c.x2 / W) &&
         in(1.0 - c.y2 / H);
}

inline double iou(const PixelRect& a, const PixelRect& b) {
  const long ix = std::max(0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
  const long iy = std::max(0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
  const long inter = ix * iy;
  const long uni = a.area() + b.area() - inter;
  return uni > 0 ? static_cast<double>(inter) / static_cast<double>(uni) : 0.0;
}

/**
 * Draws `config.n` crops with cutting points uniform over the admissible
 * integer ranges. The stream is seeded from (config.seed, image_id), so the
 * same image always gets the same crops.
 */
inline std::vector<PixelRect> generate_crops(const ImageMeta& meta, const CropConfig& config,
                                             std::string_view image_id = {}) {
  config.validate();
  if (meta.width < 1 || meta.height < 1) throw ImageTooSmall("image has no pixels");
  const AxisRange xr = crop_axis_range(meta.width, config.k1, config.k2);
  const AxisRange yr = crop_axis_range(meta.height, config.k1, config.k2);
  auto usable = [](const AxisRange& r) {
    return r.start_lo <= r.start_hi && r.end_lo <= r.end_hi && r.start_lo < r.end_hi;
  };
  if (!usable(xr) || !usable(yr)) {
    throw ImageTooSmall("image " + std::to_string(meta.width) + "x" + std::to_string(meta.height) +
                        " too small for crop bounds k1=" + std::to_string(config.k1) +
                        " k2=" + std::to_string(config.k2));
  }

  Rng rng(derive_seed(config.seed, image_id));
  auto draw = [&] {
    PixelRect c;
    do {
      c.x1 = static_cast<int>(rng.uniform_int(xr.start_lo, xr.start_hi));
      c.y1 = static_cast<int>(rng.uniform_int(yr.start_lo, yr.start_hi));
      c.x2 = static_cast<int>(rng.uniform_int(xr.end_lo, xr.end_hi));
      c.y2 = static_cast<int>(rng.uniform_int(yr.end_lo, yr.end_hi));
    } while (c.x1 >= c.x2 || c.y1 >= c.y2);
    return c;
  };

  std::vector<PixelRect> crops;
  crops.reserve(static_cast<std::size_t>(config.n));
  for (int i = 0; i < config.n; ++i) {
    PixelRect c = draw();
    if (config.max_iou) {
      for (int attempt = 0; attempt < config.max_redraws; ++attempt) {
        const bool ok = std::none_of(crops.begin(), crops.end(),
                                     [&](const PixelRect& o) { return iou(c, o) > *config.max_iou; });
        if (ok) break;
        c = draw();
      }
    }
    crops.push_back(c);
  }
  return crops;
}

// --- scorers ------------------------------------------------------------------

/// A black-box predictor mapping an image to a safety score in [0,10].
class Scorer {
 public:
  virtual ~Scorer() = default;

  virtual double score(const Image& image) = 0;

  /// Scores several images; a failure is reported as a ScoringError carrying
  /// the index of the offending image.
  virtual std::vector<double> score_batch(const std::vector<Image>& images) {
    std::vector<double> out;
    out.reserve(images.size());
    for (std::size_t i = 0; i < images.size(); ++i) {
      try {
        out.push_back(score(images[i]));
      } catch (const ScoringError& e) {
        throw ScoringError(e.what(), static_cast<long>(i));
      }
    }
    return out;
  }
};

class ConstantScorer final : public Scorer {
 public:
  explicit ConstantScorer(double value) : value_(value) {}
  double score(const Image&) override { return value_; }

 private:
  double value_;
};

/// 10 × mean normalized green intensity.
class GreenMeanScorer final : public Scorer {
 public:
  double score(const Image& image) override {
    if (image.empty()) throw ScoringError("green-mean: empty image");
    std::uint64_t sum = 0;
    const auto& b = image.bytes();
    for (std::size_t i = 1; i < b.size(); i += 3) sum += b[i];
    const double n = static_cast<double>(image.width()) * image.height();
    return 10.0 * static_cast<double>(sum) / (255.0 * n);
  }
};

/**
 * Scores the visible part of a designated rectangle, recognised by its marker
 * colour. Without a reference area the score is 10 × marker pixels / input
 * pixels; with one it is 10 × marker pixels / reference area, i.e. the
 * visible fraction of the box.
 */
class RegionBoxScorer final : public Scorer {
 public:
  explicit RegionBoxScorer(Rgb marker, std::optional<long> reference_pixels = std::nullopt)
      : marker_(marker), reference_(reference_pixels) {
    if (reference_ && *reference_ <= 0) throw InvalidInput("region-box reference area must be > 0");
  }

  double score(const Image& image) override {
    if (image.empty()) throw ScoringError("region-box: empty image");
    long hits = 0;
    const auto& b = image.bytes();
    for (std::size_t i = 0; i < b.size(); i += 3)
      if (b[i] == marker_[0] && b[i + 1] == marker_[1] && b[i + 2] == marker_[2]) ++hits;
    const double denom = reference_ ? static_cast<double>(*reference_)
                                    : static_cast<double>(image.width()) * image.height();
    return std::min(10.0, 10.0 * static_cast<double>(hits) / denom);
  }

 private:
  Rgb marker_;
  std::optional<long> reference_;
};

/// Adapts any callable; used for ad-hoc test doubles.
class FunctionScorer final : public Scorer {
 public:
  explicit FunctionScorer(std::function<double(const Image&)> f) : f_(std::move(f)) {}
  double score(const Image& image) override { return f_(image); }

 private:
  std::function<double(const Image&)> f_;
};

inline constexpr Rgb kDefaultMarker{255, 0, 255};

/**
 * Builds a synthetic scorer from a textual kind:
 *   constant:<c> | green-mean | region-box[:R,G,B[:reference_pixels]]
 */
inline std::unique_ptr<Scorer> synthetic_scorer(std::string_view kind) {
  auto parse_double = [&](std::string_view s) {
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size()) throw InvalidInput("bad synthetic scorer spec: " + std::string(kind));
    return v;
  };
  if (kind == "green-mean") return std::make_unique<GreenMeanScorer>();
  if (kind.starts_with("constant:")) return std::make_unique<ConstantScorer>(parse_double(kind.substr(9)));
  if (kind == "region-box" || kind.starts_with("region-box:")) {
    Rgb marker = kDefaultMarker;
    std::optional<long> ref;
    if (kind.size() > 10) {
      std::string_view rest = kind.substr(11);
      const auto colon = rest.find(':');
      std::string_view color = rest.substr(0, colon);
      int parts[3];
      for (int i = 0; i < 3; ++i) {
        const auto comma = color.find(',');
        if ((i < 2) == (comma == std::string_view::npos)) throw InvalidInput("bad region-box colour: " + std::string(kind));
        const double v = parse_double(color.substr(0, comma));
        if (v < 0 || v > 255) throw InvalidInput("bad region-box colour: " + std::string(kind));
        parts[i] = static_cast<int>(v);
        if (comma != std::string_view::npos) color = color.substr(comma + 1);
      }
      marker = {static_cast<std::uint8_t>(parts[0]), static_cast<std::uint8_t>(parts[1]),
                static_cast<std::uint8_t>(parts[2])};
      if (colon != std::string_view::npos) ref = static_cast<long>(parse_double(rest.substr(colon + 1)));
    }
    return std::make_unique<RegionBoxScorer>(marker, ref);
  }
  throw InvalidInput("unknown synthetic scorer kind: " + std::string(kind));
}

/// Mean of the scorer's predictions over the image's random crops.
inline double score_augmented(const Image& image, Scorer& scorer, const CropConfig& config,
                              std::string_view image_id = {}) {
  const auto rects = generate_crops({image.width(), image.height()}, config, image_id);
  std::vector<Image> crops;
  crops.reserve(rects.size());
  for (const auto& r : rects) crops.push_back(image.crop(r));
  std::vector<double> scores = scorer.score_batch(crops);
  if (scores.size() != crops.size()) throw ScoringError("scorer returned wrong number of scores");
  for (std::size_t i = 0; i < scores.size(); ++i) {
    if (!std::isfinite(scores[i])) throw ScoringError("non-finite score", static_cast<long>(i));
  }
  std::sort(scores.begin(), scores.end());
  double sum = 0.0;
  for (double s : scores) sum += s;
  return sum / static_cast<double>(scores.size());
}

}  // namespace streetsafe::scorer
