#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "trajmine/geometry.hpp"
#include "trajmine/tracker.hpp"

namespace trajmine {

/// One detector output.
struct Detection {
  Box box;
  Polygon mask;
  double score = 0.0;

  friend bool operator==(const Detection&, const Detection&) = default;
};

/// All detections for one frame of one video.
struct DetectionRecord {
  std::string video_id;
  std::int64_t frame_index = 0;
  std::vector<Detection> detections;

  friend bool operator==(const DetectionRecord&, const DetectionRecord&) = default;
};

enum class EntryKind { Detection, Tracking };

struct TrajectoryEntry {
  std::int64_t frame = 0;
  Box box;
  /// Always set for Detection entries; set for Tracking entries once a mask
  /// has been interpolated from flanking detections.
  std::optional<Polygon> mask;
  EntryKind kind = EntryKind::Detection;
  /// Detection confidence or tracking score.
  double score = 0.0;
  /// Position of the source detection in its frame's record; -1 for tracking.
  int detection_index = -1;
};

enum class TrajectoryState { Live, Terminated };

struct Trajectory {
  int id = 0;
  std::vector<TrajectoryEntry> entries;
  int missed_count = 0;
  TrajectoryState state = TrajectoryState::Live;
  /// Tracker template, refreshed from the latest detection entry.
  std::shared_ptr<const Patch> appearance;

  const TrajectoryEntry& last() const { return entries.back(); }
  std::size_t length() const noexcept { return entries.size(); }
  std::size_t detection_count() const noexcept;
  /// Number of Tracking entries at the tail.
  std::size_t trailing_tracking_run() const noexcept;
  bool live() const noexcept { return state == TrajectoryState::Live; }
};

}  // namespace trajmine
