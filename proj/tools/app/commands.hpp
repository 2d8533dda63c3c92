#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

#include "run_config.hpp"
#include "trajmine/dataset_io.hpp"
#include "trajmine/errors.hpp"
#include "trajmine/tmm.hpp"

namespace trajmine::app {

/// Process exit status for a failure category.
int exit_code(ErrorCategory category) noexcept;
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;

/// Frames for one video under `root`: `root/video_id`, or `root` itself when
/// the run has a single video. A directory holding manifest.json is read as
/// a generated video.
FrameSource open_video_frames(const std::filesystem::path& root, const std::string& video_id, bool single_video);

struct MineOutcome {
  MiningReport totals;
  std::map<std::string, MiningReport> videos;
};

/// Writes out/pseudo_dataset.json and out/report.json.
MineOutcome run_mine(const RunConfig& config);

/// One video per source image: out/<stem>/manifest.json plus unique frames.
/// Returns the number of images processed.
std::size_t run_genvideo(const RunConfig& config);

/// Writes out/sim_report.json (and out/scenario/ when requested). Returns
/// the report.
nlohmann::json run_simulate(const RunConfig& config);

/// Draws the pseudo dataset onto its frames: out/<video_id>/NNNNNN.png.
/// Returns the number of images written.
std::size_t run_render(const RunConfig& config);

}  // namespace trajmine::app
