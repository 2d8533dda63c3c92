#include "commands.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdio>
#include <exception>
#include <optional>
#include <thread>
#include <vector>

#include <spdlog/spdlog.h>

#include "trajmine/genloop.hpp"
#include "trajmine/image.hpp"
#include "trajmine/random.hpp"
#include "trajmine/sim.hpp"
#include "trajmine/tracker.hpp"

namespace trajmine::app {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code(ErrorCategory category) noexcept {
  switch (category) {
    case ErrorCategory::Config: return 2;
    case ErrorCategory::Io: return 3;
    case ErrorCategory::Data: return 4;
  }
  return kExitInternal;
}

namespace {

// Runs fn(0..n-1) on up to `jobs` threads. Every item runs; the failure with
// the lowest index is rethrown so errors do not depend on scheduling.
template <class Fn>
void parallel_for(std::size_t n, int jobs, Fn&& fn) {
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  const auto worker = [&] {
    for (std::size_t i; (i = next.fetch_add(1)) < n;) {
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(jobs, 1)), n);
  if (workers <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

void require_path(const std::string& value, const char* flag) {
  if (value.empty()) throw ConfigError(std::string("missing required ") + flag);
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

json header(const RunConfig& config) {
  return json{{"tool", "trajmine"}, {"version", kToolVersion}, {"config", to_json(config)}};
}

json report_json(const MiningReport& r) {
  return json{{"trajectories", r.trajectories},
              {"hard_positives", r.hard_positives},
              {"hard_negatives", r.hard_negatives},
              {"admitted_frames", r.admitted_frames}};
}

json metrics_json(const SimMetrics& m) {
  return json{{"purity", m.purity},
              {"hp_precision", m.hp_precision},
              {"hp_recall", m.hp_recall},
              {"hn_precision", m.hn_precision},
              {"pseudo_noise_rate", m.pseudo_noise_rate}};
}

std::string frame_name(std::int64_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%06lld.png", static_cast<long long>(index));
  return buf;
}

// Directories built next to their destination and swapped in together, so a
// failed run leaves no partial output behind.
class Staging {
 public:
  explicit Staging(fs::path root) : root_(std::move(root)) {
    std::error_code ec;
    created_root_ = !fs::exists(root_, ec);
  }
  Staging(const Staging&) = delete;
  Staging& operator=(const Staging&) = delete;
  ~Staging() {
    std::error_code ec;
    for (const auto& [tmp, dest] : dirs_) fs::remove_all(tmp, ec);
    if (created_root_ && !committed_) fs::remove(root_, ec);  // only succeeds when empty
  }

  /// Fresh empty directory that becomes root/name on commit.
  fs::path add(const std::string& name) {
    fs::path dest = root_ / name;
    fs::path tmp = dest;
    tmp += ".partial";
    std::error_code ec;
    fs::remove_all(tmp, ec);
    fs::create_directories(tmp, ec);
    if (ec) throw IoError("cannot create " + tmp.string() + ": " + ec.message());
    dirs_.emplace_back(tmp, dest);
    return tmp;
  }

  void commit() {
    for (const auto& [tmp, dest] : dirs_) {
      std::error_code ec;
      fs::remove_all(dest, ec);
      if (!ec) fs::rename(tmp, dest, ec);
      if (ec) throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
    }
    dirs_.clear();
    committed_ = true;
  }

 private:
  fs::path root_;
  std::vector<std::pair<fs::path, fs::path>> dirs_;
  bool created_root_ = false;
  bool committed_ = false;
};

std::uint64_t name_hash(const std::string& s) noexcept {
  std::uint64_t h = 14695981039346656037ull;  // FNV-1a
  for (const unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

std::vector<fs::path> source_images(const fs::path& source) {
  std::error_code ec;
  if (fs::is_regular_file(source, ec)) return {source};
  if (!fs::is_directory(source, ec)) throw IoError("source images not found: " + source.string());
  std::vector<fs::path> out;
  for (const auto& entry : fs::directory_iterator(source, ec)) {
    if (entry.is_regular_file() && entry.path().extension() == ".png") out.push_back(entry.path());
  }
  if (ec) throw IoError("cannot list " + source.string() + ": " + ec.message());
  if (out.empty()) throw IoError("no .png images in " + source.string());
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

FrameSource open_video_frames(const fs::path& root, const std::string& video_id, bool single_video) {
  std::vector<fs::path> candidates{root / video_id};
  if (single_video) candidates.push_back(root);
  std::error_code ec;
  for (const fs::path& c : candidates) {
    if (fs::is_directory(c, ec)) {
      const fs::path manifest = c / "manifest.json";
      return FrameSource::open(fs::is_regular_file(manifest, ec) ? manifest : c);
    }
    if (single_video && fs::is_regular_file(c, ec)) return FrameSource::open(c);
  }
  throw IoError("no frames for video '" + video_id + "' under " + root.string());
}

// ---------------------------------------------------------------------------

MineOutcome run_mine(const RunConfig& config) {
  config.validate();
  require_path(config.detections, "--detections");
  require_path(config.frames, "--frames");
  require_path(config.out, "--out");

  const std::vector<DetectionRecord> records = read_detections(config.detections);
  const auto grouped = group_by_video(records);
  const std::vector<std::pair<std::string, std::vector<DetectionRecord>>> videos(grouped.begin(), grouped.end());
  spdlog::info("mine: {} records across {} videos", records.size(), videos.size());

  const NccTracker tracker(config.tracker);
  std::vector<VideoMiningResult> results(videos.size());
  parallel_for(videos.size(), config.jobs, [&](std::size_t i) {
    const auto& [video_id, input] = videos[i];
    const FrameSource source = open_video_frames(config.frames, video_id, videos.size() == 1);
    // Generated videos carry detections per unique frame.
    const std::vector<DetectionRecord> recs =
        source.from_manifest() ? broadcast_detections(input, source.positions(), source.files().size()) : input;
    if (recs.empty()) return;
    const std::int64_t last = recs.back().frame_index;  // records are sorted
    if (last >= source.size()) throw MissingFrame(last);
    const FrameLoader loader = [&source](std::int64_t f) { return source.load(f); };
    results[i] = mine_video(video_id, recs, source.size(), tracker, loader, config.mining, config.matching);
    spdlog::debug("mine: video {} done, {} trajectories", video_id, results[i].report.trajectories);
  });

  MineOutcome outcome;
  PseudoDataset dataset;
  json per_video = json::object();
  for (VideoMiningResult& r : results) {
    if (r.video_id.empty()) continue;  // nothing to mine
    outcome.totals += r.report;
    outcome.videos[r.video_id] = r.report;
    per_video[r.video_id] = report_json(r.report);
    for (PseudoFrame& f : r.frames) dataset.frames.push_back(std::move(f));
  }

  dataset.meta = header(config);
  dataset.meta["report"] = report_json(outcome.totals);
  json report = header(config);
  report["totals"] = report_json(outcome.totals);
  report["videos"] = per_video;

  const fs::path out(config.out);
  write_pseudo_dataset(dataset, out / "pseudo_dataset.json");
  write_file_atomic(out / "report.json", dump(report));
  spdlog::info("mine: {} HP, {} HN, {} admitted frames", outcome.totals.hard_positives,
               outcome.totals.hard_negatives, outcome.totals.admitted_frames);
  return outcome;
}

// ---------------------------------------------------------------------------

std::size_t run_genvideo(const RunConfig& config) {
  config.validate();
  require_path(config.frames, "--frames");
  require_path(config.out, "--out");

  build_frame_schedule(config.genloop);  // reject an over-long schedule before touching disk
  const std::vector<fs::path> images = source_images(config.frames);
  Staging staging(config.out);
  std::vector<fs::path> dirs;
  for (const fs::path& img : images) dirs.push_back(staging.add(img.stem().string()));

  parallel_for(images.size(), config.jobs, [&](std::size_t i) {
    const fs::path& src = images[i];
    LoopSpec spec = config.genloop;
    spec.seed = mix_seed(config.seed, name_hash(src.stem().string()));
    const RenderedVideo video = generate_video(read_png(src), spec);

    GenloopManifest manifest;
    manifest.source_image = src.filename().string();
    manifest.mode = to_string(spec.mode);
    manifest.affine = video.end_transform;
    manifest.n_unique = video.schedule.n_unique;
    manifest.schedule = video.schedule.positions;
    manifest.config = to_json(config);
    for (std::size_t k = 0; k < video.unique_frames.size(); ++k) {
      const std::string name = frame_name(static_cast<std::int64_t>(k));
      write_png(video.unique_frames[k], dirs[i] / name);
      manifest.frame_files.push_back(name);
    }
    write_manifest(manifest, dirs[i] / "manifest.json");
    spdlog::debug("genvideo: {} -> {} unique frames, schedule {}", src.string(), video.unique_frames.size(),
                  video.schedule.length());
  });

  staging.commit();
  spdlog::info("genvideo: {} videos written to {}", images.size(), config.out);
  return images.size();
}

// ---------------------------------------------------------------------------

json run_simulate(const RunConfig& config) {
  config.validate();
  require_path(config.out, "--out");

  constexpr MatchingStrategy kStrategies[] = {MatchingStrategy::MutualBest, MatchingStrategy::Greedy};
  const auto n = static_cast<std::size_t>(config.sim.n_seeds);
  std::vector<std::array<SimMetrics, 2>> metrics(n);
  parallel_for(n, config.jobs, [&](std::size_t i) {
    for (std::size_t s = 0; s < 2; ++s) {
      TrialSpec trial{config.sim.scene, config.sim.noise, config.mining, kStrategies[s], config.sim.tracker_jitter};
      trial.scene.seed = config.seed + i;
      metrics[i][s] = run_trial(trial).metrics;
    }
  });

  json strategies = json::object();
  for (std::size_t s = 0; s < 2; ++s) {
    SimMetrics mean{0, 0, 0, 0, 0};
    json purity = json::array();
    for (const auto& m : metrics) {
      const SimMetrics& v = m[s];
      mean.purity += v.purity;
      mean.hp_precision += v.hp_precision;
      mean.hp_recall += v.hp_recall;
      mean.hn_precision += v.hn_precision;
      mean.pseudo_noise_rate += v.pseudo_noise_rate;
      purity.push_back(v.purity);
    }
    const auto count = static_cast<double>(n);
    for (double* f : {&mean.purity, &mean.hp_precision, &mean.hp_recall, &mean.hn_precision, &mean.pseudo_noise_rate}) {
      *f /= count;
    }
    strategies[to_string(kStrategies[s])] = {{"mean", metrics_json(mean)}, {"purity_per_seed", purity}};
  }
  std::size_t better = 0, worse = 0;
  for (const auto& m : metrics) {
    if (m[0].purity > m[1].purity) ++better;
    if (m[0].purity < m[1].purity) ++worse;
  }

  json report = header(config);
  report["n_seeds"] = n;
  report["seeds"] = {config.seed, config.seed + n - 1};
  report["strategies"] = strategies;
  report["purity_comparison"] = {
      {"mutual_best_higher", better}, {"mutual_best_lower", worse}, {"equal", n - better - worse}};

  std::optional<Staging> staging;
  if (config.sim.emit_scenario) {
    staging.emplace(config.out);
    const fs::path dir = staging->add("scenario");
    SceneSpec scene = config.sim.scene;
    scene.seed = config.seed;
    const GroundTruth gt = generate_scene(scene);
    Rng rng(mix_seed(config.seed, 1));  // the stream run_trial sees for this seed
    const SimulatedStream stream = simulate_detector(gt, config.sim.noise, rng, "sim");
    write_detections(stream.records, dir / "detections.jsonl");
    const fs::path frames = dir / "frames" / "sim";
    fs::create_directories(frames);
    for (int f = 0; f < gt.n_frames; ++f) write_png(render_scene_frame(gt, f, config.seed), frames / frame_name(f));

    json dropouts = json::array();
    for (const InstanceFrame& d : stream.dropouts) dropouts.push_back({d.instance, d.frame});
    json spurious = json::array();
    for (const SpuriousDetection& d : stream.spurious) spurious.push_back({d.frame, d.index});
    json gt_doc = header(config);
    gt_doc["ground_truth"] = ground_truth_json(gt);
    gt_doc["dropouts"] = dropouts;
    gt_doc["spurious"] = spurious;
    write_file_atomic(dir / "gt.json", dump(gt_doc));
  }

  write_file_atomic(fs::path(config.out) / "sim_report.json", dump(report));
  if (staging) staging->commit();
  spdlog::info("simulate: {} seeds, mutual-best higher purity on {}, lower on {}", n, better, worse);
  return report;
}

// ---------------------------------------------------------------------------

std::size_t run_render(const RunConfig& config) {
  config.validate();
  require_path(config.dataset, "--dataset");
  require_path(config.frames, "--frames");
  require_path(config.out, "--out");

  const PseudoDataset dataset = read_pseudo_dataset(config.dataset);
  std::map<std::string, std::vector<const PseudoFrame*>> by_video;
  for (const PseudoFrame& f : dataset.frames) by_video[f.video_id].push_back(&f);
  const std::vector<std::pair<std::string, std::vector<const PseudoFrame*>>> videos(by_video.begin(),
                                                                                    by_video.end());

  Staging staging(config.out);
  std::vector<fs::path> dirs;
  for (const auto& v : videos) dirs.push_back(staging.add(v.first));

  std::vector<json> files(videos.size());
  parallel_for(videos.size(), config.jobs, [&](std::size_t i) {
    const auto& [video_id, frames] = videos[i];
    const FrameSource source = open_video_frames(config.frames, video_id, videos.size() == 1);
    files[i] = json::array();
    for (const PseudoFrame* f : frames) {
      const auto image = source.load(f->frame_index);
      const std::string name = frame_name(f->frame_index);
      write_png(render_overlay(*image, overlay_items(*f)), dirs[i] / name);
      files[i].push_back(video_id + "/" + name);
    }
  });

  json index = header(config);
  json all = json::array();
  for (const json& f : files) all.insert(all.end(), f.begin(), f.end());
  index["overlays"] = all;
  staging.commit();
  write_file_atomic(fs::path(config.out) / "overlays.json", dump(index));
  spdlog::info("render: {} overlays written to {}", all.size(), config.out);
  return all.size();
}

}  // namespace trajmine::app
