#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include "app/commands.hpp"
#include "app/run_config.hpp"
#include "trajmine/errors.hpp"

namespace {

using namespace trajmine;

struct Flags {
  std::optional<std::string> config, detections, frames, dataset, out, mode, matching;
  std::optional<std::uint64_t> seed;
  std::optional<int> jobs, seeds;
  std::optional<double> theta_iou;
  bool emit_scenario = false;
};

app::RunConfig resolve(const Flags& f) {
  app::RunConfig c = f.config ? app::load_config(*f.config) : app::RunConfig{};
  if (f.detections) c.detections = *f.detections;
  if (f.frames) c.frames = *f.frames;
  if (f.dataset) c.dataset = *f.dataset;
  if (f.out) c.out = *f.out;
  if (f.seed) c.seed = *f.seed;
  if (f.jobs) c.jobs = *f.jobs;
  if (f.seeds) c.sim.n_seeds = *f.seeds;
  if (f.theta_iou) c.mining.theta_iou = *f.theta_iou;
  if (f.mode) c.genloop.mode = parse_gen_mode(*f.mode);
  if (f.matching) c.matching = parse_matching_strategy(*f.matching);
  if (f.emit_scenario) c.sim.emit_scenario = true;
  if (const char* env = std::getenv("TRAJMINE_LOG")) c.log_level = env;
  return c;
}

void setup_logging(const std::string& level) {
  auto logger = spdlog::stderr_color_mt("trajmine");
  logger->set_pattern("[%l] %v");
  spdlog::set_default_logger(logger);
  const auto parsed = spdlog::level::from_str(level);
  if (parsed == spdlog::level::off && level != "off") {
    spdlog::set_level(spdlog::level::warn);
    spdlog::warn("unknown log level '{}', using warn", level);
  } else {
    spdlog::set_level(parsed);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App cli{"Trajectory-based hard example mining for video text detection"};
  cli.set_version_flag("--version", std::string(kToolVersion));
  cli.require_subcommand(1);

  Flags f;
  const auto common = [&f](CLI::App* sub) {
    sub->add_option("--config", f.config, "JSON config file; flags override it");
    sub->add_option("--out", f.out, "Output directory");
    sub->add_option("--jobs", f.jobs, "Worker threads")->check(CLI::PositiveNumber);
  };

  CLI::App* mine = cli.add_subcommand("mine", "Mine hard examples and write a pseudo-labelled dataset");
  common(mine);
  mine->add_option("--detections", f.detections, "Line-delimited detection records");
  mine->add_option("--frames", f.frames, "Frames root: one directory or manifest per video");
  mine->add_option("--theta-iou", f.theta_iou, "Matching IoU threshold");
  mine->add_option("--matching", f.matching, "Matching strategy")->check(CLI::IsMember({"mutual-best", "greedy"}));
  mine->add_option("--seed", f.seed, "Run seed");

  CLI::App* gen = cli.add_subcommand("genvideo", "Turn still images into short synthetic videos");
  common(gen);
  gen->add_option("--frames", f.frames, "Source image or directory of images");
  gen->add_option("--mode", f.mode, "Generation mode")
      ->check(CLI::IsMember({"base", "base-trans", "straight", "loop"}));
  gen->add_option("--seed", f.seed, "Run seed");

  CLI::App* sim = cli.add_subcommand("simulate", "Compare matching strategies on synthetic scenes");
  common(sim);
  sim->add_option("--seed", f.seed, "First trial seed");
  sim->add_option("--seeds", f.seeds, "Number of trials")->check(CLI::PositiveNumber);
  sim->add_option("--theta-iou", f.theta_iou, "Matching IoU threshold");
  sim->add_flag("--emit-scenario", f.emit_scenario, "Also write detections, frames and ground truth for --seed");

  CLI::App* render = cli.add_subcommand("render", "Draw pseudo labels onto their frames");
  common(render);
  render->add_option("--dataset", f.dataset, "Pseudo dataset to draw");
  render->add_option("--frames", f.frames, "Frames root used when mining");

  try {
    cli.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return cli.exit(e);
  } catch (const CLI::ParseError& e) {
    cli.exit(e);
    return app::exit_code(ErrorCategory::Config);
  }

  try {
    const app::RunConfig config = resolve(f);
    setup_logging(config.log_level);
    if (mine->parsed()) {
      const auto r = app::run_mine(config);
      std::cout << "trajectories " << r.totals.trajectories << ", hard positives " << r.totals.hard_positives
                << ", hard negatives " << r.totals.hard_negatives << ", admitted frames "
                << r.totals.admitted_frames << "\n";
    } else if (gen->parsed()) {
      const std::size_t n = app::run_genvideo(config);
      std::cout << "videos " << n << "\n";
    } else if (sim->parsed()) {
      const auto report = app::run_simulate(config);
      for (const auto& [name, s] : report["strategies"].items()) {
        std::cout << name << " mean purity " << s["mean"]["purity"].get<double>() << "\n";
      }
    } else if (render->parsed()) {
      const std::size_t n = app::run_render(config);
      std::cout << "overlays " << n << "\n";
    }
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.category()) << "): " << e.what() << "\n";
    return app::exit_code(e.category());
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return app::kExitInternal;
  }
  return app::kExitOk;
}
