#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "trajmine/geometry.hpp"
#include "trajmine/image.hpp"
#include "trajmine/random.hpp"

namespace trajmine {

/// How a still image becomes a video.
///   Base        the image itself, one frame
///   BaseTrans   the image under one sampled transform, one frame
///   GenStraight identity -> end transform, n frames
///   GenLoop     forward, back, forward again over the same n frames
enum class GenMode { Base, BaseTrans, GenStraight, GenLoop };

const char* to_string(GenMode mode) noexcept;
/// Accepts base, base-trans, straight, loop.
GenMode parse_gen_mode(const std::string& name);

struct LoopSpec {
  GenMode mode = GenMode::GenLoop;
  int n_unique = 17;
  int t_cap = 50;
  double theta_min_deg = -15.0;
  double theta_max_deg = 15.0;
  double scale_min = 0.8;
  double scale_max = 1.25;
  /// Transform center = image center jittered by this fraction of each side.
  double center_jitter = 0.1;
  std::uint64_t seed = 0;

  void validate() const;
};

struct FrameSchedule {
  /// schedule[p] is the unique frame shown at emitted position p.
  std::vector<int> positions;
  int n_unique = 0;

  std::size_t length() const noexcept { return positions.size(); }
  friend bool operator==(const FrameSchedule&, const FrameSchedule&) = default;
};

/// Rotation uniform, scale log-uniform, center per the jitter policy.
AffineParams sample_transform(const LoopSpec& spec, int image_width, int image_height, Rng& rng);

/// Loop: 0..n-1, n-2..0, 1..n-1 (length 3n-2). Straight: 0..n-1.
/// Base modes: a single frame. Throws ScheduleTooLong past t_cap.
FrameSchedule build_frame_schedule(const LoopSpec& spec);

struct RenderedVideo {
  std::vector<Image> unique_frames;
  FrameSchedule schedule;
  AffineParams end_transform;

  const Image& at(std::size_t position) const { return unique_frames.at(schedule.positions.at(position)); }
  /// Transform that produced unique frame k.
  AffineParams transform_of(int unique_index) const;
};

/// Unique frame k is the image warped by lerp(identity, end, k / (n - 1)).
RenderedVideo render_frames(const Image& image, const AffineParams& end_transform, const FrameSchedule& schedule);

/// Samples the end transform from spec.seed and renders per spec.mode.
RenderedVideo generate_video(const Image& image, const LoopSpec& spec);

}  // namespace trajmine
