#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "trajmine/geometry.hpp"
#include "trajmine/image.hpp"
#include "trajmine/tmm.hpp"
#include "trajmine/trajectory.hpp"

namespace trajmine {

inline constexpr const char* kToolVersion = "0.1.0";

/// Rounds to 6 decimals, the precision of every serialized coordinate.
double round6(double value) noexcept;

/// Writes `contents` to a sibling temporary and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// ---------------------------------------------------------------------------
// Detection streams: one JSON object per line, one line per frame.
//   {"video_id": str, "frame_index": int >= 0,
//    "detections": [{"bbox": [x1, y1, x2, y2], "polygon": [x, y, ...], "score": s}]}

/// Parses one line. Throws ParseError (schema) or RangeError (values).
DetectionRecord parse_detection_record(const std::string& line, std::size_t line_number);

/// Reads a whole stream, skipping blank lines. The result is sorted by
/// (video_id, frame_index); a repeated frame within a video is a ParseError.
std::vector<DetectionRecord> read_detections(const std::filesystem::path& path);

std::string dump_detection_record(const DetectionRecord& record);
void write_detections(std::span<const DetectionRecord> records, const std::filesystem::path& path);

/// Splits a sorted stream by video, preserving order.
std::map<std::string, std::vector<DetectionRecord>> group_by_video(std::span<const DetectionRecord> records);

// ---------------------------------------------------------------------------
// Generated-video manifests

struct GenloopManifest {
  std::string source_image;
  std::string mode;
  AffineParams affine;
  int n_unique = 0;
  std::vector<int> schedule;
  std::vector<std::string> frame_files;  // relative to the manifest
  nlohmann::json config = nlohmann::json::object();
};

nlohmann::json to_json(const GenloopManifest& manifest);
GenloopManifest manifest_from_json(const nlohmann::json& j);
GenloopManifest read_manifest(const std::filesystem::path& path);
void write_manifest(const GenloopManifest& manifest, const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Frame sources

/// Random access to the frames of one video: either a directory of
/// numbered PNGs (000000.png, 000001.png, ...) or a genloop manifest, whose
/// emitted positions resolve to shared unique frames.
class FrameSource {
 public:
  /// Throws MissingFrame for a gap in the numbering, IoError otherwise.
  static FrameSource open(const std::filesystem::path& source);

  std::int64_t size() const noexcept { return static_cast<std::int64_t>(positions_.size()); }
  bool from_manifest() const noexcept { return manifest_; }

  /// Index into files() shown at `index`. Throws MissingFrame when out of range.
  std::size_t resolve(std::int64_t index) const;
  const std::vector<std::filesystem::path>& files() const noexcept { return files_; }
  /// positions()[p] is the index into files() shown at emitted position p.
  const std::vector<std::size_t>& positions() const noexcept { return positions_; }

  std::shared_ptr<const Image> load(std::int64_t index) const;

 private:
  std::vector<std::filesystem::path> files_;
  std::vector<std::size_t> positions_;
  bool manifest_ = false;
  // Duplicated positions decode once.
  std::shared_ptr<std::mutex> cache_mutex_ = std::make_shared<std::mutex>();
  std::shared_ptr<std::map<std::size_t, std::shared_ptr<const Image>>> cache_ =
      std::make_shared<std::map<std::size_t, std::shared_ptr<const Image>>>();
};

/// Detections run once per unique frame of a generated video, expanded onto
/// every emitted position: record u is copied to each p with positions[p] == u.
/// A record whose frame_index is not below `n_unique` throws MissingFrame.
std::vector<DetectionRecord> broadcast_detections(std::span<const DetectionRecord> unique_records,
                                                  std::span<const std::size_t> positions, std::size_t n_unique);

// ---------------------------------------------------------------------------
// Pseudo-label datasets
//   {"meta": {...}, "frames": [{"video_id", "frame_index",
//     "labels": [{"bbox", "polygon", "soft_label", "provenance", "score"}],
//     "hard_negatives": [{"bbox", "polygon", "score"}]}]}

struct PseudoDataset {
  nlohmann::json meta = nlohmann::json::object();
  std::vector<PseudoFrame> frames;

  friend bool operator==(const PseudoDataset&, const PseudoDataset&) = default;
};

/// Sorted keys, coordinates rounded to 6 decimals, trailing newline.
std::string dump_pseudo_dataset(const PseudoDataset& dataset);
PseudoDataset parse_pseudo_dataset(const std::string& text);
void write_pseudo_dataset(const PseudoDataset& dataset, const std::filesystem::path& path);
PseudoDataset read_pseudo_dataset(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// QC overlays

enum class OverlayKind { Detection, Tracking, HardPositive, HardNegative };

struct OverlayItem {
  Polygon shape;
  OverlayKind kind = OverlayKind::Detection;
};

using Rgb = std::array<std::uint8_t, 3>;

struct OverlayStyle {
  Rgb detection{255, 255, 0};
  Rgb tracking{255, 0, 0};
  Rgb hard_positive{255, 165, 0};
  Rgb hard_negative{128, 0, 128};

  Rgb color(OverlayKind kind) const noexcept;
};

/// Quad outline the overlay draws for a shape: the polygon itself when it
/// has four vertices, otherwise its minimum-area rectangle.
std::array<Point2, 4> overlay_quad(const Polygon& shape);

/// Draws one quadrilateral outline per item. Gray frames are promoted to RGB
/// when anything is drawn; with no items the frame is returned unchanged.
Image render_overlay(const Image& frame, std::span<const OverlayItem> items, const OverlayStyle& style = {});

std::vector<OverlayItem> overlay_items(const PseudoFrame& frame);
std::vector<OverlayItem> overlay_items(std::span<const Trajectory> trajectories, std::int64_t frame);

}  // namespace trajmine
