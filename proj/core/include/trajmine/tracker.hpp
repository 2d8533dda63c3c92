#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <vector>

#include "trajmine/geometry.hpp"
#include "trajmine/image.hpp"

namespace trajmine {

struct TrajectoryEntry;

/// Grayscale appearance template cut from one frame.
struct Patch {
  int width = 0;
  int height = 0;
  std::vector<double> pixels;  // row-major luma
  Box origin;                  // integer pixel extent actually sampled
  Box anchor;                  // the box the patch was requested for
  std::int64_t frame_index = -1;

  double at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
};

struct TrackerConfig {
  /// Search window grows by margin * width (height) on each side...
  double margin = 1.0;
  /// ...but never by less than this many pixels.
  double min_margin_px = 16.0;
  /// Minimum NCC peak accepted as a tracking result.
  double tau_track = 0.6;
  /// Templates older than this many frames are re-cut at the tracked box.
  int max_template_age = 5;

  void validate() const;
};

struct TrackingResult {
  Box box;
  double track_score = 0.0;
  std::int64_t frame_index = -1;
  /// Set when the tracker refreshed its template at the result box.
  std::shared_ptr<const Patch> appearance;
};

/// Frame handed to a tracker. `image` is null for pixel-free trackers.
struct FrameRef {
  std::int64_t index = 0;
  const Image* image = nullptr;
};

/// Pluggable tracker. Implementations must be deterministic and safe to call
/// concurrently.
class TrackerContract {
 public:
  virtual ~TrackerContract() = default;

  virtual std::optional<TrackingResult> track(const TrajectoryEntry& last, const Patch* appearance,
                                              const FrameRef& frame) const = 0;

  /// Appearance to cache after a detection is appended. Pixel-free trackers
  /// return null.
  virtual std::shared_ptr<const Patch> capture(const FrameRef& frame, const Box& box) const {
    (void)frame;
    (void)box;
    return nullptr;
  }
};

/// Throws TrackerError(EmptyPatch) when the box misses the frame.
Patch extract_patch(const Image& frame, const Box& box, std::int64_t frame_index = -1);

struct MatchPeak {
  Box box;  // template-sized box at the peak offset
  double score = 0.0;
};

/// Exhaustive zero-normalised cross-correlation inside `search`. Ties go to
/// the smallest (y, then x) offset. Throws TrackerError(ZeroVariance) when the
/// template or every candidate window is flat, and SearchTooSmall when the
/// clipped search region cannot hold the template.
MatchPeak ncc_match(const Patch& templ, const Image& frame, const Box& search);

/// Search window for a box: expanded by the configured margin, clipped to the frame.
std::optional<Box> search_region(const Box& last, int frame_width, int frame_height,
                                 const TrackerConfig& config);

class NccTracker final : public TrackerContract {
 public:
  explicit NccTracker(TrackerConfig config = {});

  std::optional<TrackingResult> track(const TrajectoryEntry& last, const Patch* appearance,
                                      const FrameRef& frame) const override;
  std::shared_ptr<const Patch> capture(const FrameRef& frame, const Box& box) const override;

  const TrackerConfig& config() const noexcept { return config_; }

 private:
  TrackerConfig config_;
};

}  // namespace trajmine
