#include "trajmine/genloop.hpp"

#include <cmath>
#include <numbers>

#include "trajmine/errors.hpp"

namespace trajmine {

const char* to_string(GenMode mode) noexcept {
  switch (mode) {
    case GenMode::Base: return "base";
    case GenMode::BaseTrans: return "base-trans";
    case GenMode::GenStraight: return "straight";
    case GenMode::GenLoop: return "loop";
  }
  return "unknown";
}

GenMode parse_gen_mode(const std::string& name) {
  if (name == "base") return GenMode::Base;
  if (name == "base-trans") return GenMode::BaseTrans;
  if (name == "straight") return GenMode::GenStraight;
  if (name == "loop") return GenMode::GenLoop;
  throw ConfigError("unknown generation mode '" + name + "' (expected base, base-trans, straight or loop)");
}

void LoopSpec::validate() const {
  if (t_cap < 1) throw ConfigError("genloop.t_cap must be >= 1");
  if ((mode == GenMode::GenStraight || mode == GenMode::GenLoop) && n_unique < 2) {
    throw ConfigError("genloop.n_unique must be >= 2 for straight and loop modes");
  }
  if (!(theta_min_deg <= theta_max_deg)) throw ConfigError("genloop theta range is empty");
  if (!(scale_min > 0.0 && scale_min <= scale_max)) throw ConfigError("genloop scale range must be positive and ordered");
  if (!(center_jitter >= 0.0 && center_jitter <= 0.5)) throw ConfigError("genloop.center_jitter must lie in [0, 0.5]");
}

AffineParams sample_transform(const LoopSpec& spec, int image_width, int image_height, Rng& rng) {
  AffineParams p;
  p.theta_rot_deg = rng.uniform(spec.theta_min_deg, spec.theta_max_deg);
  p.scale = std::exp(rng.uniform(std::log(spec.scale_min), std::log(spec.scale_max)));
  const double jx = rng.uniform(-spec.center_jitter, spec.center_jitter);
  const double jy = rng.uniform(-spec.center_jitter, spec.center_jitter);
  p.center = {(image_width - 1) / 2.0 + jx * image_width, (image_height - 1) / 2.0 + jy * image_height};
  return p;
}

FrameSchedule build_frame_schedule(const LoopSpec& spec) {
  spec.validate();
  FrameSchedule s;
  switch (spec.mode) {
    case GenMode::Base:
    case GenMode::BaseTrans:
      s.n_unique = 1;
      s.positions = {0};
      break;
    case GenMode::GenStraight:
      s.n_unique = spec.n_unique;
      for (int k = 0; k < spec.n_unique; ++k) s.positions.push_back(k);
      break;
    case GenMode::GenLoop: {
      const int n = spec.n_unique;
      s.n_unique = n;
      for (int k = 0; k < n; ++k) s.positions.push_back(k);
      for (int k = n - 2; k >= 0; --k) s.positions.push_back(k);
      for (int k = 1; k < n; ++k) s.positions.push_back(k);
      break;
    }
  }
  if (s.positions.size() > static_cast<std::size_t>(spec.t_cap)) {
    throw ScheduleTooLong(s.positions.size(), static_cast<std::size_t>(spec.t_cap));
  }
  return s;
}

AffineParams RenderedVideo::transform_of(int unique_index) const {
  const AffineParams start = AffineParams::identity(end_transform.center);
  if (schedule.n_unique <= 1) return unique_index == 0 && schedule.n_unique == 1 ? end_transform : start;
  return lerp_affine(start, end_transform, static_cast<double>(unique_index) / (schedule.n_unique - 1));
}

RenderedVideo render_frames(const Image& image, const AffineParams& end_transform, const FrameSchedule& schedule) {
  if (image.empty()) throw GeometryError("render_frames: empty image");
  RenderedVideo video{{}, schedule, end_transform};
  video.unique_frames.reserve(static_cast<std::size_t>(schedule.n_unique));
  for (int k = 0; k < schedule.n_unique; ++k) {
    video.unique_frames.push_back(warp_image(image, video.transform_of(k), image.width, image.height));
  }
  return video;
}

RenderedVideo generate_video(const Image& image, const LoopSpec& spec) {
  const FrameSchedule schedule = build_frame_schedule(spec);
  if (spec.mode == GenMode::Base) {
    const AffineParams id = AffineParams::identity({(image.width - 1) / 2.0, (image.height - 1) / 2.0});
    return RenderedVideo{{image}, schedule, id};
  }
  Rng rng(spec.seed);
  const AffineParams end = sample_transform(spec, image.width, image.height, rng);
  return render_frames(image, end, schedule);
}

}  // namespace trajmine
