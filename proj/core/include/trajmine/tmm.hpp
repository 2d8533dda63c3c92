#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "trajmine/geometry.hpp"
#include "trajmine/image.hpp"
#include "trajmine/tracker.hpp"
#include "trajmine/trajectory.hpp"

namespace trajmine {

struct MiningConfig {
  /// IoU a detection/trajectory pair must exceed to match.
  double theta_iou = 0.5;
  /// Consecutive detection entries required on each side of a hard positive.
  int n_ctx = 2;
  /// Longest run of tracking entries that can become hard positives.
  int max_gap = 1;
  /// Trajectories failing any of these three filters yield hard negatives.
  int min_traj_len = 5;
  int min_det_count = 2;
  double min_det_ratio = 0.3;
  /// Consecutive empty frames after which a trajectory terminates.
  int max_missed = 2;
  /// Longest tracking-only tail a trajectory may grow.
  int max_track_run = 8;

  void validate() const;
};

// ---------------------------------------------------------------------------
// Association

/// max(IoU(det, tracked), IoU(det, last)); reduces to IoU(det, last) when the
/// tracker produced nothing.
double score_pair(const Box& det, const std::optional<Box>& tracked, const Box& last) noexcept;

/// Detections x trajectories score matrix with a suppression mask.
class MatchMatrix {
 public:
  MatchMatrix() = default;
  MatchMatrix(std::size_t rows, std::size_t cols);

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }

  /// Suppressed cells read as 0.
  double at(std::size_t i, std::size_t j) const;
  double raw(std::size_t i, std::size_t j) const;
  bool suppressed(std::size_t i, std::size_t j) const;
  void set(std::size_t i, std::size_t j, double value);
  void suppress(std::size_t i, std::size_t j);
  void suppress_row(std::size_t i);
  void suppress_col(std::size_t j);

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> values_;
  std::vector<char> suppressed_;
};

/// M[i][j] = score_pair(dets[i], tracked[j], last[j]). `tracked` and `last`
/// must have equal length.
MatchMatrix build_match_matrix(std::span<const Box> dets, std::span<const std::optional<Box>> tracked,
                               std::span<const Box> last);

struct MatchResult {
  /// det_to_traj[i] is the trajectory column assigned to detection i.
  std::vector<std::optional<std::size_t>> det_to_traj;
  std::vector<std::size_t> unmatched;  // ascending

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

enum class MatchingStrategy { MutualBest, Greedy };

const char* to_string(MatchingStrategy strategy) noexcept;
/// Accepts "mutual-best" and "greedy"; throws ConfigError otherwise.
MatchingStrategy parse_matching_strategy(const std::string& name);

/// Mutual-best matching with suppress-and-research. Detections are visited in
/// descending order of their row maximum (ties by index). A pair is accepted
/// when each side is the other's argmax over the unsuppressed matrix and the
/// score exceeds theta; the accepted row and column are then suppressed.
/// Rejected cells are suppressed and the detection searches again.
MatchResult resolve_matches(MatchMatrix matrix, double theta);

/// First-come-first-served baseline: trajectories in column order each claim
/// their best unclaimed detection above theta.
MatchResult resolve_matches_greedy(const MatchMatrix& matrix, double theta);

MatchResult resolve(const MatchMatrix& matrix, double theta, MatchingStrategy strategy);

// ---------------------------------------------------------------------------
// Trajectory maintenance

/// Per-video trajectory state. Frames must be stepped in increasing order.
class TrajectoryStore {
 public:
  const std::vector<Trajectory>& trajectories() const noexcept { return trajectories_; }
  std::vector<Trajectory>& trajectories() noexcept { return trajectories_; }
  std::optional<std::int64_t> last_frame() const noexcept { return last_frame_; }
  std::size_t live_count() const noexcept;

  /// Terminates every live trajectory (end of video).
  void finish();

 private:
  friend void step_frame(TrajectoryStore&, const FrameRef&, std::span<const Detection>, const TrackerContract&,
                         const MiningConfig&, MatchingStrategy);

  std::vector<Trajectory> trajectories_;
  std::optional<std::int64_t> last_frame_;
  int next_id_ = 0;
};

/// Advances the store by one frame: track, match, extend, age, spawn.
/// Throws OutOfOrderFrame when `frame.index` does not increase.
void step_frame(TrajectoryStore& store, const FrameRef& frame, std::span<const Detection> detections,
                const TrackerContract& tracker, const MiningConfig& config,
                MatchingStrategy strategy = MatchingStrategy::MutualBest);

// ---------------------------------------------------------------------------
// Mask estimation and mining

/// Mask for the tracking entry at `frame` interpolated corner-wise between
/// the minimum-area rectangles of the nearest detection masks on either side.
/// Throws NoFlankingDetections when either side has no detection entry.
Polygon interpolate_mask(const Trajectory& trajectory, std::int64_t frame);

/// Fills masks of every tracking entry that has detections on both sides.
void estimate_tracking_masks(Trajectory& trajectory);

struct HardExamples {
  std::vector<TrajectoryEntry> positives;
  std::vector<TrajectoryEntry> negatives;
};

bool is_spurious(const Trajectory& trajectory, const MiningConfig& config) noexcept;

HardExamples mine_hard_examples(const Trajectory& trajectory, const MiningConfig& config);

// ---------------------------------------------------------------------------
// Pseudo-labels

enum class Provenance { Detection, HardPositive };

const char* to_string(Provenance provenance) noexcept;

struct PseudoLabel {
  Box box;
  Polygon mask;
  double soft_label = 0.0;
  Provenance provenance = Provenance::Detection;
  double score = 0.0;

  friend bool operator==(const PseudoLabel&, const PseudoLabel&) = default;
};

struct PseudoFrame {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::vector<PseudoLabel> labels;
  std::vector<Detection> hard_negatives;

  friend bool operator==(const PseudoFrame&, const PseudoFrame&) = default;
};

/// Labels = (detections minus hard negatives) plus hard positives. Returns
/// nullopt when the frame has neither hard positives nor hard negatives.
/// `hard_negatives` holds indices into `detections`.
std::optional<PseudoFrame> compute_pseudo_labels(std::span<const Detection> detections,
                                                 std::span<const std::size_t> hard_negatives,
                                                 std::span<const TrajectoryEntry> hard_positives);

/// soft_label = 1 for hard positives, the entry score otherwise.
void assign_soft_labels(PseudoFrame& frame);

inline constexpr double kBceEpsilon = 1e-7;

/// Binary cross-entropy against a soft target, p clamped to [eps, 1 - eps].
double balance_bce(double target, double p) noexcept;

// ---------------------------------------------------------------------------
// Whole-video mining

struct MiningReport {
  std::size_t trajectories = 0;
  std::size_t hard_positives = 0;
  std::size_t hard_negatives = 0;
  std::size_t admitted_frames = 0;

  MiningReport& operator+=(const MiningReport& other);
  friend bool operator==(const MiningReport&, const MiningReport&) = default;
};

struct FrameHardExample {
  std::int64_t frame;
  int trajectory_id;
  TrajectoryEntry entry;
};

struct VideoMiningResult {
  std::string video_id;
  std::vector<Trajectory> trajectories;
  std::vector<FrameHardExample> hard_positives;
  std::vector<FrameHardExample> hard_negatives;
  std::vector<PseudoFrame> frames;  // admitted frames, ascending index
  MiningReport report;
};

/// Supplies the image for a frame index; may return null for pixel-free runs.
using FrameLoader = std::function<std::shared_ptr<const Image>(std::int64_t)>;

/// Runs the full pipeline over frames [0, frame_count). `records` must belong
/// to one video; frames without a record have no detections.
VideoMiningResult mine_video(const std::string& video_id, std::span<const DetectionRecord> records,
                             std::int64_t frame_count, const TrackerContract& tracker, const FrameLoader& frames,
                             const MiningConfig& config, MatchingStrategy strategy = MatchingStrategy::MutualBest);

}  // namespace trajmine
