#include <algorithm>
#include <numeric>
#include <tuple>

#include "trajmine/errors.hpp"
#include "trajmine/tmm.hpp"

namespace trajmine {

void MiningConfig::validate() const {
  if (!(theta_iou > 0.0 && theta_iou < 1.0)) throw ConfigError("tmm.theta_iou must lie in (0, 1)");
  if (n_ctx < 1) throw ConfigError("tmm.n_ctx must be >= 1");
  if (max_gap < 0) throw ConfigError("tmm.max_gap must be >= 0");
  if (min_traj_len < 0) throw ConfigError("tmm.min_traj_len must be >= 0");
  if (min_det_count < 0) throw ConfigError("tmm.min_det_count must be >= 0");
  if (!(min_det_ratio >= 0.0 && min_det_ratio <= 1.0)) throw ConfigError("tmm.min_det_ratio must lie in [0, 1]");
  if (max_missed < 1) throw ConfigError("tmm.max_missed must be >= 1");
  if (max_track_run < 0) throw ConfigError("tmm.max_track_run must be >= 0");
}

std::size_t Trajectory::detection_count() const noexcept {
  return static_cast<std::size_t>(std::count_if(entries.begin(), entries.end(), [](const TrajectoryEntry& e) {
    return e.kind == EntryKind::Detection;
  }));
}

std::size_t Trajectory::trailing_tracking_run() const noexcept {
  std::size_t run = 0;
  for (auto it = entries.rbegin(); it != entries.rend() && it->kind == EntryKind::Tracking; ++it) ++run;
  return run;
}

std::size_t TrajectoryStore::live_count() const noexcept {
  return static_cast<std::size_t>(
      std::count_if(trajectories_.begin(), trajectories_.end(), [](const Trajectory& t) { return t.live(); }));
}

void TrajectoryStore::finish() {
  for (Trajectory& t : trajectories_) t.state = TrajectoryState::Terminated;
}

void step_frame(TrajectoryStore& store, const FrameRef& frame, std::span<const Detection> detections,
                const TrackerContract& tracker, const MiningConfig& config, MatchingStrategy strategy) {
  if (store.last_frame_ && frame.index <= *store.last_frame_) throw OutOfOrderFrame(frame.index, *store.last_frame_);

  // Content order makes the outcome independent of how detections arrive.
  std::vector<std::size_t> det_order(detections.size());
  std::iota(det_order.begin(), det_order.end(), 0);
  std::stable_sort(det_order.begin(), det_order.end(), [&](std::size_t a, std::size_t b) {
    const Detection& da = detections[a];
    const Detection& db = detections[b];
    return std::make_tuple(da.box.x1(), da.box.y1(), da.box.x2(), da.box.y2(), -da.score) <
           std::make_tuple(db.box.x1(), db.box.y1(), db.box.x2(), db.box.y2(), -db.score);
  });

  std::vector<std::size_t> live;
  for (std::size_t t = 0; t < store.trajectories_.size(); ++t) {
    if (store.trajectories_[t].live()) live.push_back(t);
  }

  std::vector<std::optional<TrackingResult>> provisional(live.size());
  std::vector<std::optional<Box>> tracked(live.size());
  std::vector<Box> last_boxes;
  last_boxes.reserve(live.size());
  for (std::size_t j = 0; j < live.size(); ++j) {
    const Trajectory& traj = store.trajectories_[live[j]];
    provisional[j] = tracker.track(traj.last(), traj.appearance.get(), frame);
    if (provisional[j]) tracked[j] = provisional[j]->box;
    last_boxes.push_back(traj.last().box);
  }

  std::vector<Box> det_boxes;
  det_boxes.reserve(detections.size());
  for (const std::size_t k : det_order) det_boxes.push_back(detections[k].box);

  const MatchResult match = resolve(build_match_matrix(det_boxes, tracked, last_boxes), config.theta_iou, strategy);

  std::vector<char> traj_matched(live.size(), 0);
  for (std::size_t r = 0; r < det_order.size(); ++r) {
    if (!match.det_to_traj[r]) continue;
    const std::size_t j = *match.det_to_traj[r];
    traj_matched[j] = 1;
    const Detection& det = detections[det_order[r]];
    Trajectory& traj = store.trajectories_[live[j]];
    traj.entries.push_back(TrajectoryEntry{frame.index, det.box, det.mask, EntryKind::Detection, det.score,
                                           static_cast<int>(det_order[r])});
    traj.missed_count = 0;
    traj.appearance = tracker.capture(frame, det.box);
  }

  for (std::size_t j = 0; j < live.size(); ++j) {
    if (traj_matched[j]) continue;
    Trajectory& traj = store.trajectories_[live[j]];
    const bool can_track = provisional[j].has_value() &&
                           traj.trailing_tracking_run() + 1 <= static_cast<std::size_t>(config.max_track_run);
    if (can_track) {
      const TrackingResult& res = *provisional[j];
      traj.entries.push_back(
          TrajectoryEntry{frame.index, res.box, std::nullopt, EntryKind::Tracking, res.track_score, -1});
      traj.missed_count = 0;
      if (res.appearance) traj.appearance = res.appearance;
    } else if (++traj.missed_count >= config.max_missed) {
      traj.state = TrajectoryState::Terminated;
    }
  }

  for (const std::size_t r : match.unmatched) {
    const Detection& det = detections[det_order[r]];
    Trajectory traj;
    traj.id = store.next_id_++;
    traj.entries.push_back(TrajectoryEntry{frame.index, det.box, det.mask, EntryKind::Detection, det.score,
                                           static_cast<int>(det_order[r])});
    traj.appearance = tracker.capture(frame, det.box);
    store.trajectories_.push_back(std::move(traj));
  }

  store.last_frame_ = frame.index;
}

}  // namespace trajmine
