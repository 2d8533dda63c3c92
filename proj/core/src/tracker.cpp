#include "trajmine/tracker.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "trajmine/errors.hpp"
#include "trajmine/trajectory.hpp"

namespace trajmine {
namespace {

struct PixelRect {
  int x0, y0, x1, y1;  // half-open
  int width() const { return x1 - x0; }
  int height() const { return y1 - y0; }
};

}  // namespace

void TrackerConfig::validate() const {
  if (!(margin >= 0.0) || !(min_margin_px >= 0.0)) throw ConfigError("tracker.margin must be >= 0");
  if (!(tau_track >= -1.0 && tau_track <= 1.0)) throw ConfigError("tracker.tau_track must lie in [-1, 1]");
  if (max_template_age < 0) throw ConfigError("tracker.max_template_age must be >= 0");
}

Patch extract_patch(const Image& frame, const Box& box, std::int64_t frame_index) {
  const int x0 = std::max(0, static_cast<int>(std::lround(box.x1())));
  const int y0 = std::max(0, static_cast<int>(std::lround(box.y1())));
  const int x1 = std::min(frame.width, static_cast<int>(std::lround(box.x2())));
  const int y1 = std::min(frame.height, static_cast<int>(std::lround(box.y2())));
  if (x1 <= x0 || y1 <= y0) throw TrackerError(TrackerError::Kind::EmptyPatch, "patch box lies outside the frame");

  Patch patch{x1 - x0, y1 - y0, {}, Box(x0, y0, x1, y1), box, frame_index};
  patch.pixels.reserve(static_cast<std::size_t>(patch.width) * patch.height);
  for (int y = y0; y < y1; ++y) {
    for (int x = x0; x < x1; ++x) patch.pixels.push_back(luma(frame, x, y));
  }
  return patch;
}

MatchPeak ncc_match(const Patch& templ, const Image& frame, const Box& search) {
  const PixelRect region{
      std::max(0, static_cast<int>(std::floor(search.x1()))),
      std::max(0, static_cast<int>(std::floor(search.y1()))),
      std::min(frame.width, static_cast<int>(std::ceil(search.x2()))),
      std::min(frame.height, static_cast<int>(std::ceil(search.y2()))),
  };
  const int tw = templ.width;
  const int th = templ.height;
  if (region.width() < tw || region.height() < th) {
    throw TrackerError(TrackerError::Kind::SearchTooSmall, "search region smaller than template");
  }

  const double n = static_cast<double>(tw) * th;
  double tmean = 0.0;
  for (double v : templ.pixels) tmean += v;
  tmean /= n;
  std::vector<double> tzero(templ.pixels.size());
  double tnorm2 = 0.0;
  for (std::size_t i = 0; i < tzero.size(); ++i) {
    tzero[i] = templ.pixels[i] - tmean;
    tnorm2 += tzero[i] * tzero[i];
  }
  if (tnorm2 <= 1e-10 * n) throw TrackerError(TrackerError::Kind::ZeroVariance, "template has zero variance");

  // Luma of the search region plus integral images for window sums.
  const int rw = region.width();
  const int rh = region.height();
  std::vector<double> lum(static_cast<std::size_t>(rw) * rh);
  for (int y = 0; y < rh; ++y) {
    for (int x = 0; x < rw; ++x) lum[static_cast<std::size_t>(y) * rw + x] = luma(frame, region.x0 + x, region.y0 + y);
  }
  const auto idx = [rw](int x, int y) { return static_cast<std::size_t>(y) * (rw + 1) + x; };
  std::vector<double> sum(static_cast<std::size_t>(rw + 1) * (rh + 1), 0.0);
  std::vector<double> sum2(sum.size(), 0.0);
  for (int y = 0; y < rh; ++y) {
    for (int x = 0; x < rw; ++x) {
      const double v = lum[static_cast<std::size_t>(y) * rw + x];
      sum[idx(x + 1, y + 1)] = v + sum[idx(x, y + 1)] + sum[idx(x + 1, y)] - sum[idx(x, y)];
      sum2[idx(x + 1, y + 1)] = v * v + sum2[idx(x, y + 1)] + sum2[idx(x + 1, y)] - sum2[idx(x, y)];
    }
  }
  const auto window = [&](const std::vector<double>& s, int x, int y) {
    return s[idx(x + tw, y + th)] - s[idx(x, y + th)] - s[idx(x + tw, y)] + s[idx(x, y)];
  };

  const double tnorm = std::sqrt(tnorm2);
  double best = -std::numeric_limits<double>::infinity();
  int best_x = -1, best_y = -1;
  for (int y = 0; y + th <= rh; ++y) {
    for (int x = 0; x + tw <= rw; ++x) {
      const double s1 = window(sum, x, y);
      const double s2 = window(sum2, x, y);
      const double var = s2 - s1 * s1 / n;
      if (var <= 1e-10 * std::max(1.0, s2)) continue;
      double dot = 0.0;
      for (int ty = 0; ty < th; ++ty) {
        const double* row = &lum[static_cast<std::size_t>(y + ty) * rw + x];
        const double* trow = &tzero[static_cast<std::size_t>(ty) * tw];
        for (int tx = 0; tx < tw; ++tx) dot += trow[tx] * row[tx];
      }
      const double score = dot / (tnorm * std::sqrt(var));
      if (score > best) {
        best = score;
        best_x = x;
        best_y = y;
      }
    }
  }
  if (best_x < 0) throw TrackerError(TrackerError::Kind::ZeroVariance, "every candidate window has zero variance");

  const double px = region.x0 + best_x;
  const double py = region.y0 + best_y;
  return MatchPeak{Box(px, py, px + tw, py + th), std::clamp(best, -1.0, 1.0)};
}

std::optional<Box> search_region(const Box& last, int frame_width, int frame_height, const TrackerConfig& config) {
  const double mx = std::max(config.margin * last.width(), config.min_margin_px);
  const double my = std::max(config.margin * last.height(), config.min_margin_px);
  const auto grown = Box::try_make(last.x1() - mx, last.y1() - my, last.x2() + mx, last.y2() + my);
  if (!grown) return std::nullopt;
  return clip_to_frame(*grown, frame_width, frame_height);
}

NccTracker::NccTracker(TrackerConfig config) : config_(config) { config_.validate(); }

std::shared_ptr<const Patch> NccTracker::capture(const FrameRef& frame, const Box& box) const {
  if (frame.image == nullptr) return nullptr;
  try {
    return std::make_shared<const Patch>(extract_patch(*frame.image, box, frame.index));
  } catch (const TrackerError&) {
    return nullptr;
  }
}

std::optional<TrackingResult> NccTracker::track(const TrajectoryEntry& last, const Patch* appearance,
                                                const FrameRef& frame) const {
  if (frame.image == nullptr || appearance == nullptr) return std::nullopt;
  const Image& image = *frame.image;
  const auto search = search_region(last.box, image.width, image.height, config_);
  if (!search) return std::nullopt;

  MatchPeak peak{appearance->origin, 0.0};
  try {
    peak = ncc_match(*appearance, image, *search);
  } catch (const TrackerError&) {
    return std::nullopt;
  }
  if (peak.score < config_.tau_track) return std::nullopt;

  const double dx = peak.box.x1() - appearance->origin.x1();
  const double dy = peak.box.y1() - appearance->origin.y1();
  const auto box = clip_to_frame(appearance->anchor.translated(dx, dy), image.width, image.height);
  if (!box) return std::nullopt;

  TrackingResult result{*box, peak.score, frame.index, nullptr};
  if (frame.index - appearance->frame_index > config_.max_template_age) {
    result.appearance = capture(frame, *box);
  }
  return result;
}

}  // namespace trajmine
