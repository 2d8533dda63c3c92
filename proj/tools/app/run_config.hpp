#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "trajmine/genloop.hpp"
#include "trajmine/sim.hpp"
#include "trajmine/tmm.hpp"
#include "trajmine/tracker.hpp"

namespace trajmine::app {

struct SimSettings {
  SceneSpec scene;
  NoiseSpec noise;
  /// Trials per strategy; trial i uses seed + i.
  int n_seeds = 100;
  double tracker_jitter = 0.0;
  /// Also write one scenario (detections, frames, ground truth) for `seed`.
  bool emit_scenario = false;
};

/// Everything a run depends on. Per-image and per-trial seeds are derived
/// from `seed`, so the seed fields inside `genloop` and `sim.scene` are unused.
struct RunConfig {
  MiningConfig mining;
  TrackerConfig tracker;
  LoopSpec genloop;
  SimSettings sim;
  MatchingStrategy matching = MatchingStrategy::MutualBest;

  std::string detections;
  std::string frames;
  std::string dataset;
  std::string out;

  std::uint64_t seed = 0;
  /// Execution-only settings. They never change output bytes and are left
  /// out of the embedded copy.
  int jobs = 1;
  std::string log_level = "warn";

  void validate() const;
};

/// Output-affecting fields, with sorted keys.
nlohmann::json to_json(const RunConfig& config);

/// Strict: unknown keys and wrongly typed values are ConfigErrors. Missing
/// keys keep their defaults.
RunConfig config_from_json(const nlohmann::json& j);

/// Reads a JSON config file. Throws IoError when unreadable.
RunConfig load_config(const std::filesystem::path& path);

}  // namespace trajmine::app
