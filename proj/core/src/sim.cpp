#include "trajmine/sim.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "trajmine/errors.hpp"

namespace trajmine {

void SceneSpec::validate() const {
  if (n_instances < 0) throw ConfigError("sim.n_instances must be >= 0");
  if (n_frames < 1) throw ConfigError("sim.n_frames must be >= 1");
  if (!(canvas_width > 0 && canvas_height > 0)) throw ConfigError("sim canvas must be positive");
  if (!(min_box_width > 0 && min_box_width <= max_box_width)) throw ConfigError("sim box width range invalid");
  if (!(min_box_height > 0 && min_box_height <= max_box_height)) throw ConfigError("sim box height range invalid");
  if (!(max_speed >= 0)) throw ConfigError("sim.max_speed must be >= 0");
  if (!std::isfinite(angular_rate_deg)) throw ConfigError("sim.angular_rate must be finite");
  if (crossing && n_instances < 2) throw ConfigError("sim crossing scenario needs at least 2 instances");
  const double reach = angular_rate_deg != 0.0 ? std::hypot(max_box_width, max_box_height) : max_box_width;
  const double reach_y = angular_rate_deg != 0.0 ? reach : max_box_height;
  if (reach > canvas_width || reach_y > canvas_height) throw InfeasibleSpec("sim boxes cannot fit the canvas");
}

const GtState* GroundTruth::at(int instance, std::int64_t frame) const noexcept {
  if (instance < 0 || static_cast<std::size_t>(instance) >= instances.size()) return nullptr;
  const auto& states = instances[static_cast<std::size_t>(instance)].states;
  if (frame < 0 || static_cast<std::size_t>(frame) >= states.size() || !states[static_cast<std::size_t>(frame)]) {
    return nullptr;
  }
  return &*states[static_cast<std::size_t>(frame)];
}

std::optional<int> GroundTruth::identify(const Box& box, std::int64_t frame, double min_iou) const noexcept {
  std::optional<int> best;
  double best_iou = 0.0;
  for (std::size_t i = 0; i < instances.size(); ++i) {
    const GtState* s = at(static_cast<int>(i), frame);
    if (!s) continue;
    const double v = iou(box, s->box);
    if (v > best_iou) {
      best_iou = v;
      best = static_cast<int>(i);
    }
  }
  if (!best || best_iou < min_iou) return std::nullopt;
  return best;
}

namespace {

struct Motion {
  double w, h;
  Point2 c0, v;
};

GtState state_at(const Motion& m, double angular_rate_deg, int t) {
  const Point2 c{m.c0.x + m.v.x * t, m.c0.y + m.v.y * t};
  if (angular_rate_deg == 0.0) {
    const Box b{c.x - m.w / 2, c.y - m.h / 2, c.x + m.w / 2, c.y + m.h / 2};
    return {b, box_polygon(b)};
  }
  const RotatedRect r{c, m.w, m.h, angular_rate_deg * t};
  const auto q = order_corners(r);
  Polygon mask{{q.begin(), q.end()}};
  return {mask.bounds(), mask};
}

// Start-centre interval keeping [c - half, c + half] inside [0, extent] for
// the whole run at velocity v over `span` frames.
std::pair<double, double> start_range(double half, double extent, double v, double span) {
  return {half - std::min(0.0, v * span), extent - half - std::max(0.0, v * span)};
}

}  // namespace

GroundTruth generate_scene(const SceneSpec& spec) {
  spec.validate();
  Rng rng(spec.seed);
  GroundTruth gt{spec.n_frames, spec.canvas_width, spec.canvas_height, {}};
  const double span = spec.n_frames - 1;
  const bool rotating = spec.angular_rate_deg != 0.0;

  std::vector<Motion> motions;
  for (int i = 0; i < spec.n_instances; ++i) {
    Motion m{};
    m.w = rng.uniform(spec.min_box_width, spec.max_box_width);
    m.h = rng.uniform(spec.min_box_height, spec.max_box_height);
    const double half_x = (rotating ? std::hypot(m.w, m.h) : m.w) / 2;
    const double half_y = (rotating ? std::hypot(m.w, m.h) : m.h) / 2;
    const double vmax_x = span > 0 ? std::min(spec.max_speed, (spec.canvas_width - 2 * half_x) / span) : 0.0;
    const double vmax_y = span > 0 ? std::min(spec.max_speed, (spec.canvas_height - 2 * half_y) / span) : 0.0;
    m.v = {rng.uniform(-vmax_x, vmax_x), rng.uniform(-vmax_y, vmax_y)};
    const auto [x_lo, x_hi] = start_range(half_x, spec.canvas_width, m.v.x, span);
    const auto [y_lo, y_hi] = start_range(half_y, spec.canvas_height, m.v.y, span);
    m.c0 = {rng.uniform(x_lo, std::max(x_lo, x_hi)), rng.uniform(y_lo, std::max(y_lo, y_hi))};
    motions.push_back(m);
  }

  if (spec.crossing) {
    // Opposite horizontal motion meeting at the middle frame, vertically
    // offset by 15-35% of the height.
    Motion& a = motions[0];
    Motion& b = motions[1];
    b.w = a.w;
    b.h = a.h;
    const int meet = (spec.n_frames - 1) / 2;
    const double dy = rng.uniform(0.15, 0.35) * a.h;
    const double half_x = (rotating ? std::hypot(a.w, a.h) : a.w) / 2;
    const double half_y = (rotating ? std::hypot(a.w, a.h) : a.h) / 2;
    const double reach = std::max<double>(meet, spec.n_frames - 1 - meet);
    double speed = rng.uniform(0.5, 1.0) * spec.max_speed;
    if (reach > 0) speed = std::min(speed, (spec.canvas_width / 2 - half_x) / reach);
    if (spec.canvas_height < 2 * half_y + dy) throw InfeasibleSpec("sim crossing pair cannot fit the canvas");
    const double cy = rng.uniform(half_y, spec.canvas_height - half_y - dy);
    const double cx = spec.canvas_width / 2;
    a.v = {speed, 0.0};
    b.v = {-speed, 0.0};
    a.c0 = {cx - speed * meet, cy};
    b.c0 = {cx + speed * meet, cy + dy};
  }

  for (int i = 0; i < spec.n_instances; ++i) {
    GtInstance inst{i, {}};
    inst.states.reserve(static_cast<std::size_t>(spec.n_frames));
    for (int t = 0; t < spec.n_frames; ++t) {
      inst.states.emplace_back(state_at(motions[static_cast<std::size_t>(i)], spec.angular_rate_deg, t));
    }
    gt.instances.push_back(std::move(inst));
  }
  return gt;
}

// ---------------------------------------------------------------------------

void NoiseSpec::validate() const {
  const auto prob = [](double p) { return p >= 0.0 && p <= 1.0; };
  if (!prob(p_miss)) throw ConfigError("noise.p_miss must lie in [0, 1]");
  if (!prob(p_spurious)) throw ConfigError("noise.p_spurious must lie in [0, 1]");
  if (!(jitter_sigma >= 0.0)) throw ConfigError("noise.jitter_sigma must be >= 0");
  if (!(prob(score_min) && prob(score_max) && score_min <= score_max)) {
    throw ConfigError("noise score range must be ordered within [0, 1]");
  }
}

namespace {

Box jitter_box(const Box& b, double sigma, Rng& rng) {
  if (sigma == 0.0) return b;
  const double e[4] = {rng.truncated_normal(sigma), rng.truncated_normal(sigma), rng.truncated_normal(sigma),
                       rng.truncated_normal(sigma)};
  const auto j = Box::try_make(b.x1() + e[0], b.y1() + e[1], b.x2() + e[2], b.y2() + e[3]);
  return j ? *j : b;
}

Polygon carry_mask(const Polygon& mask, const Box& from, const Box& to) {
  if (from == to) return mask;
  // Convex weights keep the box corners exact.
  Polygon out;
  out.vertices.reserve(mask.vertices.size());
  for (const Point2& p : mask.vertices) {
    const double u = (p.x - from.x1()) / from.width();
    const double v = (p.y - from.y1()) / from.height();
    out.vertices.push_back({(1 - u) * to.x1() + u * to.x2(), (1 - v) * to.y1() + v * to.y2()});
  }
  return out;
}

}  // namespace

SimulatedStream simulate_detector(const GroundTruth& gt, const NoiseSpec& noise, Rng& rng,
                                  const std::string& video_id) {
  noise.validate();
  const std::set<InstanceFrame> forced(noise.forced_dropouts.begin(), noise.forced_dropouts.end());
  SimulatedStream out;
  for (int f = 0; f < gt.n_frames; ++f) {
    DetectionRecord rec{video_id, f, {}};
    for (std::size_t i = 0; i < gt.instances.size(); ++i) {
      const int id = static_cast<int>(i);
      const GtState* s = gt.at(id, f);
      if (!s) continue;
      const bool missed = rng.bernoulli(noise.p_miss);
      const Box box = jitter_box(s->box, noise.jitter_sigma, rng);
      const double score = rng.uniform(noise.score_min, noise.score_max);
      if (missed || forced.contains({id, f})) {
        out.dropouts.push_back({id, f});
        continue;
      }
      rec.detections.push_back(Detection{box, carry_mask(s->mask, s->box, box), score});
    }
    if (noise.p_spurious > 0.0 && rng.bernoulli(noise.p_spurious)) {
      const double w = rng.uniform(20.0, std::min(60.0, gt.canvas_width));
      const double h = rng.uniform(10.0, std::min(30.0, gt.canvas_height));
      const double x = rng.uniform(0.0, gt.canvas_width - w);
      const double y = rng.uniform(0.0, gt.canvas_height - h);
      const Box b{x, y, x + w, y + h};
      out.spurious.push_back({f, rec.detections.size()});
      rec.detections.push_back(Detection{b, box_polygon(b), rng.uniform(noise.score_min, noise.score_max)});
    }
    out.records.push_back(std::move(rec));
  }
  std::sort(out.dropouts.begin(), out.dropouts.end());
  return out;
}

// ---------------------------------------------------------------------------

std::optional<TrackingResult> OracleTracker::track(const TrajectoryEntry& last, const Patch*,
                                                   const FrameRef& frame) const {
  const auto id = gt_->identify(last.box, last.frame);
  if (!id) return std::nullopt;
  const GtState* s = gt_->at(*id, frame.index);
  if (!s) return std::nullopt;
  Box box = s->box;
  if (jitter_sigma_ > 0.0) {
    Rng rng(mix_seed(mix_seed(seed_, static_cast<std::uint64_t>(*id)), static_cast<std::uint64_t>(frame.index)));
    box = jitter_box(box, jitter_sigma_, rng);
  }
  return TrackingResult{box, kScore, frame.index, nullptr};
}

// ---------------------------------------------------------------------------

std::vector<InstanceFrame> flanked_dropouts(const GroundTruth& gt, std::span<const InstanceFrame> dropouts,
                                            const MiningConfig& config) {
  const std::set<InstanceFrame> dropped(dropouts.begin(), dropouts.end());
  std::vector<InstanceFrame> out;
  for (std::size_t i = 0; i < gt.instances.size(); ++i) {
    const int id = static_cast<int>(i);
    const auto detected = [&](std::int64_t f) { return gt.at(id, f) && !dropped.contains({id, f}); };
    std::int64_t f = 0;
    while (f < gt.n_frames) {
      if (!gt.at(id, f) || !dropped.contains({id, f})) {
        ++f;
        continue;
      }
      const std::int64_t a = f;
      while (f < gt.n_frames && gt.at(id, f) && dropped.contains({id, f})) ++f;
      const std::int64_t b = f - 1;
      bool ok = b - a + 1 <= config.max_gap;
      for (int k = 1; ok && k <= config.n_ctx; ++k) ok = detected(a - k) && detected(b + k);
      if (ok) {
        for (std::int64_t g = a; g <= b; ++g) out.push_back({id, g});
      }
    }
  }
  return out;
}

double trajectory_purity(const Trajectory& trajectory, const GroundTruth& gt, double match_iou) {
  if (trajectory.entries.empty()) return 1.0;
  std::map<int, std::size_t> votes;
  for (const TrajectoryEntry& e : trajectory.entries) {
    if (const auto id = gt.identify(e.box, e.frame, match_iou)) ++votes[*id];
  }
  std::size_t majority = 0;
  for (const auto& [_, n] : votes) majority = std::max(majority, n);
  return static_cast<double>(majority) / static_cast<double>(trajectory.entries.size());
}

SimMetrics evaluate(const VideoMiningResult& mined, const GroundTruth& gt, std::span<const InstanceFrame> dropouts,
                    const MiningConfig& config, double match_iou) {
  SimMetrics m;
  if (!mined.trajectories.empty()) {
    double sum = 0.0;
    for (const Trajectory& t : mined.trajectories) sum += trajectory_purity(t, gt, match_iou);
    m.purity = sum / static_cast<double>(mined.trajectories.size());
  }

  const std::set<InstanceFrame> dropped(dropouts.begin(), dropouts.end());
  std::set<InstanceFrame> recovered;
  std::size_t hp_correct = 0;
  for (const FrameHardExample& hp : mined.hard_positives) {
    const auto id = gt.identify(hp.entry.box, hp.frame, match_iou);
    if (id && dropped.contains({*id, hp.frame})) {
      ++hp_correct;
      recovered.insert({*id, hp.frame});
    }
  }
  if (!mined.hard_positives.empty()) {
    m.hp_precision = static_cast<double>(hp_correct) / static_cast<double>(mined.hard_positives.size());
  }
  const auto targets = flanked_dropouts(gt, dropouts, config);
  if (!targets.empty()) {
    std::size_t hit = 0;
    for (const InstanceFrame& t : targets) hit += recovered.contains(t) ? 1 : 0;
    m.hp_recall = static_cast<double>(hit) / static_cast<double>(targets.size());
  }

  if (!mined.hard_negatives.empty()) {
    std::size_t spurious = 0;
    for (const FrameHardExample& hn : mined.hard_negatives) {
      spurious += gt.identify(hn.entry.box, hn.frame, match_iou) ? 0 : 1;
    }
    m.hn_precision = static_cast<double>(spurious) / static_cast<double>(mined.hard_negatives.size());
  }

  std::size_t labels = 0, noisy = 0;
  for (const PseudoFrame& f : mined.frames) {
    for (const PseudoLabel& l : f.labels) {
      ++labels;
      noisy += gt.identify(l.box, f.frame_index, match_iou) ? 0 : 1;
    }
  }
  if (labels > 0) m.pseudo_noise_rate = static_cast<double>(noisy) / static_cast<double>(labels);
  return m;
}

TrialResult run_trial(const TrialSpec& spec) {
  TrialResult r;
  r.gt = generate_scene(spec.scene);
  Rng rng(mix_seed(spec.scene.seed, 1));
  r.stream = simulate_detector(r.gt, spec.noise, rng);
  const OracleTracker tracker(r.gt, spec.tracker_jitter, mix_seed(spec.scene.seed, 2));
  r.mined = mine_video("sim", r.stream.records, r.gt.n_frames, tracker, nullptr, spec.mining, spec.strategy);
  r.metrics = evaluate(r.mined, r.gt, r.stream.dropouts, spec.mining);
  return r;
}

// ---------------------------------------------------------------------------

Image render_scene_frame(const GroundTruth& gt, std::int64_t frame, std::uint64_t seed) {
  const int w = static_cast<int>(std::ceil(gt.canvas_width));
  const int h = static_cast<int>(std::ceil(gt.canvas_height));
  Image img(w, h, 1);
  const auto texel = [](std::uint64_t s, long x, long y) {
    return static_cast<std::uint8_t>(mix_seed(mix_seed(s, static_cast<std::uint64_t>(x)), static_cast<std::uint64_t>(y)) & 0xff);
  };
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) img.at(x, y) = static_cast<std::uint8_t>(texel(seed, x, y) / 4 + 96);
  for (std::size_t i = 0; i < gt.instances.size(); ++i) {
    const GtState* s = gt.at(static_cast<int>(i), frame);
    if (!s) continue;
    const long ox = std::lround(s->box.x1()), oy = std::lround(s->box.y1());
    const long ex = std::lround(s->box.x2()), ey = std::lround(s->box.y2());
    const std::uint64_t tex = mix_seed(seed, 0x1000 + i);
    for (long y = std::max(0L, oy); y < std::min<long>(h, ey); ++y)
      for (long x = std::max(0L, ox); x < std::min<long>(w, ex); ++x) {
        img.at(static_cast<int>(x), static_cast<int>(y)) = texel(tex, x - ox, y - oy);
      }
  }
  return img;
}

nlohmann::json ground_truth_json(const GroundTruth& gt) {
  nlohmann::json instances = nlohmann::json::array();
  for (const GtInstance& inst : gt.instances) {
    nlohmann::json frames = nlohmann::json::array();
    for (std::size_t f = 0; f < inst.states.size(); ++f) {
      if (!inst.states[f]) continue;
      const Box& b = inst.states[f]->box;
      nlohmann::json poly = nlohmann::json::array();
      for (const Point2& p : inst.states[f]->mask.vertices) {
        poly.push_back(p.x);
        poly.push_back(p.y);
      }
      frames.push_back({{"frame_index", f}, {"bbox", {b.x1(), b.y1(), b.x2(), b.y2()}}, {"polygon", poly}});
    }
    instances.push_back({{"id", inst.id}, {"frames", frames}});
  }
  return {{"n_frames", gt.n_frames},
          {"canvas", {gt.canvas_width, gt.canvas_height}},
          {"instances", instances}};
}

}  // namespace trajmine
