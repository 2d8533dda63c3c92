#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>

#include "trajmine/errors.hpp"
#include "trajmine/tmm.hpp"

namespace trajmine {
namespace {

std::array<Point2, 4> canonical_corners(const Polygon& mask) { return order_corners(min_area_rect(mask)); }

// Cyclic shift of `fwd` that best lines up with `back`. Canonical ordering
// already agrees for small rotations; this guards orientations that straddle
// the ordering's tie point.
std::array<Point2, 4> align_corners(const std::array<Point2, 4>& back, const std::array<Point2, 4>& fwd) {
  std::size_t best_shift = 0;
  double best_cost = std::numeric_limits<double>::infinity();
  for (std::size_t shift = 0; shift < 4; ++shift) {
    double cost = 0.0;
    for (std::size_t k = 0; k < 4; ++k) {
      const Point2 d = fwd[(k + shift) % 4] - back[k];
      cost += d.x * d.x + d.y * d.y;
    }
    if (cost < best_cost * (1.0 - 1e-12)) {
      best_cost = cost;
      best_shift = shift;
    }
  }
  std::array<Point2, 4> out;
  for (std::size_t k = 0; k < 4; ++k) out[k] = fwd[(k + best_shift) % 4];
  return out;
}

}  // namespace

Polygon interpolate_mask(const Trajectory& trajectory, std::int64_t frame) {
  const TrajectoryEntry* back = nullptr;
  const TrajectoryEntry* fwd = nullptr;
  for (const TrajectoryEntry& e : trajectory.entries) {
    if (e.kind != EntryKind::Detection || !e.mask) continue;
    if (e.frame < frame) back = &e;
    if (e.frame > frame && fwd == nullptr) fwd = &e;
  }
  if (back == nullptr || fwd == nullptr) throw NoFlankingDetections(frame);

  const double a = static_cast<double>(frame - back->frame);
  const double b = static_cast<double>(fwd->frame - frame);
  const double t = a / (a + b);
  const std::array<Point2, 4> from = canonical_corners(*back->mask);
  const std::array<Point2, 4> to = align_corners(from, canonical_corners(*fwd->mask));

  Polygon out;
  out.vertices.reserve(4);
  for (std::size_t k = 0; k < 4; ++k) out.vertices.push_back(from[k] + t * (to[k] - from[k]));
  return out;
}

void estimate_tracking_masks(Trajectory& trajectory) {
  for (TrajectoryEntry& e : trajectory.entries) {
    if (e.kind != EntryKind::Tracking || e.mask) continue;
    try {
      e.mask = interpolate_mask(trajectory, e.frame);
    } catch (const NoFlankingDetections&) {
    } catch (const GeometryError&) {
    }
  }
}

bool is_spurious(const Trajectory& trajectory, const MiningConfig& config) noexcept {
  const std::size_t length = trajectory.length();
  const std::size_t dets = trajectory.detection_count();
  const double ratio = length == 0 ? 0.0 : static_cast<double>(dets) / static_cast<double>(length);
  return length < static_cast<std::size_t>(config.min_traj_len) ||
         dets < static_cast<std::size_t>(config.min_det_count) || ratio < config.min_det_ratio;
}

HardExamples mine_hard_examples(const Trajectory& trajectory, const MiningConfig& config) {
  HardExamples out;
  const auto& e = trajectory.entries;
  if (is_spurious(trajectory, config)) {
    for (const TrajectoryEntry& entry : e) {
      if (entry.kind == EntryKind::Detection) out.negatives.push_back(entry);
    }
    return out;
  }

  const auto is_det = [&](std::size_t k) { return e[k].kind == EntryKind::Detection; };
  const auto adjacent = [&](std::size_t k) { return e[k + 1].frame == e[k].frame + 1; };

  std::size_t i = 0;
  while (i < e.size()) {
    if (is_det(i)) {
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < e.size() && !is_det(j) && adjacent(j - 1)) ++j;
    const std::size_t run = j - i;

    std::size_t before = 0;
    for (std::size_t k = i; k > 0 && before < static_cast<std::size_t>(config.n_ctx); --k) {
      if (!is_det(k - 1) || !adjacent(k - 1)) break;
      ++before;
    }
    std::size_t after = 0;
    for (std::size_t k = j; k < e.size() && after < static_cast<std::size_t>(config.n_ctx); ++k) {
      if (!is_det(k) || !adjacent(k - 1)) break;
      ++after;
    }

    const bool flanked = before >= static_cast<std::size_t>(config.n_ctx) &&
                         after >= static_cast<std::size_t>(config.n_ctx);
    const bool masked = std::all_of(e.begin() + static_cast<std::ptrdiff_t>(i),
                                    e.begin() + static_cast<std::ptrdiff_t>(j),
                                    [](const TrajectoryEntry& x) { return x.mask.has_value(); });
    if (run <= static_cast<std::size_t>(config.max_gap) && flanked && masked) {
      out.positives.insert(out.positives.end(), e.begin() + static_cast<std::ptrdiff_t>(i),
                           e.begin() + static_cast<std::ptrdiff_t>(j));
    }
    i = j;
  }
  return out;
}

const char* to_string(Provenance provenance) noexcept {
  return provenance == Provenance::HardPositive ? "hp" : "det";
}

std::optional<PseudoFrame> compute_pseudo_labels(std::span<const Detection> detections,
                                                 std::span<const std::size_t> hard_negatives,
                                                 std::span<const TrajectoryEntry> hard_positives) {
  if (hard_negatives.empty() && hard_positives.empty()) return std::nullopt;

  const std::set<std::size_t> negative(hard_negatives.begin(), hard_negatives.end());
  PseudoFrame frame;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    const Detection& d = detections[i];
    if (negative.count(i) != 0) {
      frame.hard_negatives.push_back(d);
    } else {
      frame.labels.push_back(PseudoLabel{d.box, d.mask, 0.0, Provenance::Detection, d.score});
    }
  }
  for (const TrajectoryEntry& hp : hard_positives) {
    const Polygon mask = hp.mask ? *hp.mask : box_polygon(hp.box);
    frame.labels.push_back(PseudoLabel{mask.bounds(), mask, 0.0, Provenance::HardPositive, hp.score});
  }
  return frame;
}

void assign_soft_labels(PseudoFrame& frame) {
  for (PseudoLabel& label : frame.labels) {
    label.soft_label = label.provenance == Provenance::HardPositive ? 1.0 : std::clamp(label.score, 0.0, 1.0);
  }
}

double balance_bce(double target, double p) noexcept {
  const double q = std::clamp(p, kBceEpsilon, 1.0 - kBceEpsilon);
  return -(target * std::log(q) + (1.0 - target) * std::log(1.0 - q));
}

MiningReport& MiningReport::operator+=(const MiningReport& other) {
  trajectories += other.trajectories;
  hard_positives += other.hard_positives;
  hard_negatives += other.hard_negatives;
  admitted_frames += other.admitted_frames;
  return *this;
}

VideoMiningResult mine_video(const std::string& video_id, std::span<const DetectionRecord> records,
                             std::int64_t frame_count, const TrackerContract& tracker, const FrameLoader& frames,
                             const MiningConfig& config, MatchingStrategy strategy) {
  config.validate();
  std::map<std::int64_t, const DetectionRecord*> by_frame;
  for (const DetectionRecord& r : records) {
    if (r.video_id != video_id) throw Error(ErrorCategory::Data, "record for video '" + r.video_id +
                                                                     "' passed while mining '" + video_id + "'");
    if (r.frame_index < 0 || r.frame_index >= frame_count) {
      throw Error(ErrorCategory::Data, "video '" + video_id + "': detections for frame " +
                                           std::to_string(r.frame_index) + " outside [0, " +
                                           std::to_string(frame_count) + ")");
    }
    if (!by_frame.emplace(r.frame_index, &r).second) {
      throw Error(ErrorCategory::Data,
                  "video '" + video_id + "': duplicate record for frame " + std::to_string(r.frame_index));
    }
  }

  static const std::vector<Detection> kNone;
  const auto detections_at = [&](std::int64_t f) -> const std::vector<Detection>& {
    const auto it = by_frame.find(f);
    return it == by_frame.end() ? kNone : it->second->detections;
  };

  TrajectoryStore store;
  for (std::int64_t f = 0; f < frame_count; ++f) {
    const std::shared_ptr<const Image> image = frames ? frames(f) : nullptr;
    step_frame(store, FrameRef{f, image.get()}, detections_at(f), tracker, config, strategy);
  }
  store.finish();

  VideoMiningResult result;
  result.video_id = video_id;
  result.trajectories = std::move(store.trajectories());

  std::map<std::int64_t, std::vector<TrajectoryEntry>> hp_by_frame;
  std::map<std::int64_t, std::vector<std::size_t>> hn_by_frame;
  for (Trajectory& traj : result.trajectories) {
    estimate_tracking_masks(traj);
    HardExamples hx = mine_hard_examples(traj, config);
    for (TrajectoryEntry& e : hx.positives) {
      hp_by_frame[e.frame].push_back(e);
      result.hard_positives.push_back(FrameHardExample{e.frame, traj.id, e});
    }
    for (TrajectoryEntry& e : hx.negatives) {
      hn_by_frame[e.frame].push_back(static_cast<std::size_t>(e.detection_index));
      result.hard_negatives.push_back(FrameHardExample{e.frame, traj.id, e});
    }
  }

  std::set<std::int64_t> candidates;
  for (const auto& [f, _] : hp_by_frame) candidates.insert(f);
  for (const auto& [f, _] : hn_by_frame) candidates.insert(f);
  for (const std::int64_t f : candidates) {
    std::vector<std::size_t> hn = hn_by_frame[f];
    std::sort(hn.begin(), hn.end());
    hn.erase(std::unique(hn.begin(), hn.end()), hn.end());
    auto frame = compute_pseudo_labels(detections_at(f), hn, hp_by_frame[f]);
    if (!frame) continue;
    frame->video_id = video_id;
    frame->frame_index = f;
    assign_soft_labels(*frame);
    result.frames.push_back(std::move(*frame));
  }

  result.report.trajectories = result.trajectories.size();
  result.report.hard_positives = result.hard_positives.size();
  result.report.hard_negatives = result.hard_negatives.size();
  result.report.admitted_frames = result.frames.size();
  return result;
}

}  // namespace trajmine
