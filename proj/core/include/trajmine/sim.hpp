#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajmine/geometry.hpp"
#include "trajmine/image.hpp"
#include "trajmine/random.hpp"
#include "trajmine/tmm.hpp"
#include "trajmine/tracker.hpp"
#include "trajmine/trajectory.hpp"

namespace trajmine {

/// Synthetic scene: instances moving at constant velocity on a canvas.
struct SceneSpec {
  int n_instances = 2;
  int n_frames = 30;
  double canvas_width = 640.0;
  double canvas_height = 360.0;
  double min_box_width = 40.0;
  double max_box_width = 120.0;
  double min_box_height = 16.0;
  double max_box_height = 48.0;
  /// Per-axis speed bound, px per frame.
  double max_speed = 4.0;
  /// Mask rotation per frame, degrees. Boxes are the mask bounds.
  double angular_rate_deg = 0.0;
  /// Instances 0 and 1 share a size and pass each other mid-sequence.
  bool crossing = false;
  std::uint64_t seed = 0;

  /// Throws ConfigError for invalid values, InfeasibleSpec when a box
  /// cannot fit the canvas.
  void validate() const;
};

struct GtState {
  Box box;
  Polygon mask;
};

struct GtInstance {
  int id = 0;
  /// states[f] is empty while the instance is out of the scene.
  std::vector<std::optional<GtState>> states;
};

struct GroundTruth {
  int n_frames = 0;
  double canvas_width = 0.0;
  double canvas_height = 0.0;
  std::vector<GtInstance> instances;

  const GtState* at(int instance, std::int64_t frame) const noexcept;
  /// Instance with the highest IoU against `box` at `frame` (lowest id on
  /// ties), or nullopt when that IoU is below `min_iou` or zero.
  std::optional<int> identify(const Box& box, std::int64_t frame, double min_iou = 0.0) const noexcept;
};

GroundTruth generate_scene(const SceneSpec& spec);

struct InstanceFrame {
  int instance = 0;
  std::int64_t frame = 0;

  friend auto operator<=>(const InstanceFrame&, const InstanceFrame&) = default;
};

struct NoiseSpec {
  double p_miss = 0.0;
  std::vector<InstanceFrame> forced_dropouts;
  /// Std-dev of the truncated (+-3 sigma) Gaussian added to each box coordinate.
  double jitter_sigma = 0.0;
  double score_min = 0.7;
  double score_max = 1.0;
  /// Per-frame chance of one false positive placed at random.
  double p_spurious = 0.0;

  void validate() const;
};

struct SpuriousDetection {
  std::int64_t frame = 0;
  std::size_t index = 0;  // position in the frame's record
};

struct SimulatedStream {
  std::vector<DetectionRecord> records;      // one per frame, ascending
  std::vector<InstanceFrame> dropouts;       // sorted
  std::vector<SpuriousDetection> spurious;
};

/// Detections per frame in instance order; spurious boxes go last. Each
/// mask is the gt mask carried from the gt box onto the jittered box.
SimulatedStream simulate_detector(const GroundTruth& gt, const NoiseSpec& noise, Rng& rng,
                                  const std::string& video_id = "sim");

/// Pixel-free tracker that reads the answer from ground truth.
class OracleTracker final : public TrackerContract {
 public:
  static constexpr double kScore = 0.99;

  explicit OracleTracker(const GroundTruth& gt, double jitter_sigma = 0.0, std::uint64_t seed = 0)
      : gt_(&gt), jitter_sigma_(jitter_sigma), seed_(seed) {}

  std::optional<TrackingResult> track(const TrajectoryEntry& last, const Patch* appearance,
                                      const FrameRef& frame) const override;

 private:
  const GroundTruth* gt_;
  double jitter_sigma_;
  std::uint64_t seed_;
};

/// Dropout runs the miner is expected to recover: at most `max_gap` frames
/// long with `n_ctx` detected frames on both sides.
std::vector<InstanceFrame> flanked_dropouts(const GroundTruth& gt, std::span<const InstanceFrame> dropouts,
                                            const MiningConfig& config);

struct SimMetrics {
  double purity = 1.0;
  double hp_precision = 1.0;
  double hp_recall = 1.0;
  double hn_precision = 1.0;
  double pseudo_noise_rate = 0.0;
};

/// Empty denominators give the vacuous value (1 for ratios of correct
/// items, 0 for the noise rate).
SimMetrics evaluate(const VideoMiningResult& mined, const GroundTruth& gt, std::span<const InstanceFrame> dropouts,
                    const MiningConfig& config, double match_iou = 0.5);

double trajectory_purity(const Trajectory& trajectory, const GroundTruth& gt, double match_iou = 0.5);

struct TrialSpec {
  SceneSpec scene;
  NoiseSpec noise;
  MiningConfig mining;
  MatchingStrategy strategy = MatchingStrategy::MutualBest;
  double tracker_jitter = 0.0;
};

struct TrialResult {
  GroundTruth gt;
  SimulatedStream stream;
  VideoMiningResult mined;
  SimMetrics metrics;
};

/// Scene, detector noise, mining with the oracle tracker, and metrics, all
/// derived from spec.scene.seed.
TrialResult run_trial(const TrialSpec& spec);

/// Gray frame with a static noise background and per-instance textures that
/// move with their boxes, for pixel-based tracking runs.
Image render_scene_frame(const GroundTruth& gt, std::int64_t frame, std::uint64_t seed);

nlohmann::json ground_truth_json(const GroundTruth& gt);

}  // namespace trajmine
