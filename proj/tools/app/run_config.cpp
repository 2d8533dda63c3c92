#include "run_config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "trajmine/errors.hpp"

namespace trajmine::app {

using nlohmann::json;

void RunConfig::validate() const {
  mining.validate();
  tracker.validate();
  genloop.validate();
  sim.scene.validate();
  sim.noise.validate();
  if (sim.n_seeds < 1) throw ConfigError("sim.n_seeds must be >= 1");
  if (!(sim.tracker_jitter >= 0.0)) throw ConfigError("sim.tracker_jitter must be >= 0");
  if (jobs < 1) throw ConfigError("jobs must be >= 1");
}

json to_json(const RunConfig& c) {
  json dropouts = json::array();
  for (const InstanceFrame& d : c.sim.noise.forced_dropouts) dropouts.push_back({d.instance, d.frame});
  const SceneSpec& s = c.sim.scene;
  const NoiseSpec& n = c.sim.noise;
  return json{
      {"matching", to_string(c.matching)},
      {"seed", c.seed},
      {"paths", {{"detections", c.detections}, {"frames", c.frames}, {"dataset", c.dataset}, {"out", c.out}}},
      {"mining",
       {{"theta_iou", c.mining.theta_iou},
        {"n_ctx", c.mining.n_ctx},
        {"max_gap", c.mining.max_gap},
        {"min_traj_len", c.mining.min_traj_len},
        {"min_det_count", c.mining.min_det_count},
        {"min_det_ratio", c.mining.min_det_ratio},
        {"max_missed", c.mining.max_missed},
        {"max_track_run", c.mining.max_track_run}}},
      {"tracker",
       {{"margin", c.tracker.margin},
        {"min_margin_px", c.tracker.min_margin_px},
        {"tau_track", c.tracker.tau_track},
        {"max_template_age", c.tracker.max_template_age}}},
      {"genloop",
       {{"mode", to_string(c.genloop.mode)},
        {"n_unique", c.genloop.n_unique},
        {"t_cap", c.genloop.t_cap},
        {"theta_min_deg", c.genloop.theta_min_deg},
        {"theta_max_deg", c.genloop.theta_max_deg},
        {"scale_min", c.genloop.scale_min},
        {"scale_max", c.genloop.scale_max},
        {"center_jitter", c.genloop.center_jitter}}},
      {"sim",
       {{"n_seeds", c.sim.n_seeds},
        {"tracker_jitter", c.sim.tracker_jitter},
        {"emit_scenario", c.sim.emit_scenario},
        {"scene",
         {{"n_instances", s.n_instances},
          {"n_frames", s.n_frames},
          {"canvas_width", s.canvas_width},
          {"canvas_height", s.canvas_height},
          {"min_box_width", s.min_box_width},
          {"max_box_width", s.max_box_width},
          {"min_box_height", s.min_box_height},
          {"max_box_height", s.max_box_height},
          {"max_speed", s.max_speed},
          {"angular_rate_deg", s.angular_rate_deg},
          {"crossing", s.crossing}}},
        {"noise",
         {{"p_miss", n.p_miss},
          {"forced_dropouts", dropouts},
          {"jitter_sigma", n.jitter_sigma},
          {"score_min", n.score_min},
          {"score_max", n.score_max},
          {"p_spurious", n.p_spurious}}}}},
  };
}

namespace {

// Reads known keys from one object and rejects the rest.
class Section {
 public:
  Section(const json& j, std::string name) : j_(&j), name_(std::move(name)) {
    if (!j.is_object()) throw ConfigError(label() + " must be an object");
  }

  bool has(const char* key) const { return j_->contains(key); }

  void get(const char* key, double& out) { read(key, out, &json::is_number, "a number"); }
  void get(const char* key, int& out) { read(key, out, &json::is_number_integer, "an integer"); }
  void get(const char* key, bool& out) { read(key, out, &json::is_boolean, "a boolean"); }
  void get(const char* key, std::string& out) { read(key, out, &json::is_string, "a string"); }
  void get(const char* key, std::uint64_t& out) {
    read(key, out, &json::is_number_unsigned, "a non-negative integer");
  }

  Section sub(const char* key) {
    seen_.insert(key);
    return Section(j_->at(key), path(key));
  }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_->at(key);
  }

  std::string path(const char* key) const { return name_.empty() ? key : name_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_->items()) {
      if (!seen_.contains(key)) throw ConfigError("unknown config key " + path(key.c_str()));
    }
  }

 private:
  template <class T>
  void read(const char* key, T& out, bool (json::*check)() const noexcept, const char* what) {
    seen_.insert(key);
    const auto it = j_->find(key);
    if (it == j_->end()) return;
    if (!((*it).*check)()) throw ConfigError(path(key) + " must be " + what);
    out = it->template get<T>();
  }

  std::string label() const { return name_.empty() ? "config" : name_; }

  const json* j_;
  std::string name_;
  std::set<std::string> seen_;
};

}  // namespace

RunConfig config_from_json(const json& j) {
  RunConfig c;
  Section root(j, "");

  std::string matching = to_string(c.matching);
  root.get("matching", matching);
  c.matching = parse_matching_strategy(matching);
  root.get("seed", c.seed);
  root.get("jobs", c.jobs);
  root.get("log_level", c.log_level);

  if (root.has("paths")) {
    Section p = root.sub("paths");
    p.get("detections", c.detections);
    p.get("frames", c.frames);
    p.get("dataset", c.dataset);
    p.get("out", c.out);
    p.finish();
  }
  if (root.has("mining")) {
    Section m = root.sub("mining");
    m.get("theta_iou", c.mining.theta_iou);
    m.get("n_ctx", c.mining.n_ctx);
    m.get("max_gap", c.mining.max_gap);
    m.get("min_traj_len", c.mining.min_traj_len);
    m.get("min_det_count", c.mining.min_det_count);
    m.get("min_det_ratio", c.mining.min_det_ratio);
    m.get("max_missed", c.mining.max_missed);
    m.get("max_track_run", c.mining.max_track_run);
    m.finish();
  }
  if (root.has("tracker")) {
    Section t = root.sub("tracker");
    t.get("margin", c.tracker.margin);
    t.get("min_margin_px", c.tracker.min_margin_px);
    t.get("tau_track", c.tracker.tau_track);
    t.get("max_template_age", c.tracker.max_template_age);
    t.finish();
  }
  if (root.has("genloop")) {
    Section g = root.sub("genloop");
    std::string mode = to_string(c.genloop.mode);
    g.get("mode", mode);
    c.genloop.mode = parse_gen_mode(mode);
    g.get("n_unique", c.genloop.n_unique);
    g.get("t_cap", c.genloop.t_cap);
    g.get("theta_min_deg", c.genloop.theta_min_deg);
    g.get("theta_max_deg", c.genloop.theta_max_deg);
    g.get("scale_min", c.genloop.scale_min);
    g.get("scale_max", c.genloop.scale_max);
    g.get("center_jitter", c.genloop.center_jitter);
    g.finish();
  }
  if (root.has("sim")) {
    Section s = root.sub("sim");
    s.get("n_seeds", c.sim.n_seeds);
    s.get("tracker_jitter", c.sim.tracker_jitter);
    s.get("emit_scenario", c.sim.emit_scenario);
    if (s.has("scene")) {
      Section sc = s.sub("scene");
      SceneSpec& v = c.sim.scene;
      sc.get("n_instances", v.n_instances);
      sc.get("n_frames", v.n_frames);
      sc.get("canvas_width", v.canvas_width);
      sc.get("canvas_height", v.canvas_height);
      sc.get("min_box_width", v.min_box_width);
      sc.get("max_box_width", v.max_box_width);
      sc.get("min_box_height", v.min_box_height);
      sc.get("max_box_height", v.max_box_height);
      sc.get("max_speed", v.max_speed);
      sc.get("angular_rate_deg", v.angular_rate_deg);
      sc.get("crossing", v.crossing);
      sc.finish();
    }
    if (s.has("noise")) {
      Section n = s.sub("noise");
      NoiseSpec& v = c.sim.noise;
      n.get("p_miss", v.p_miss);
      n.get("jitter_sigma", v.jitter_sigma);
      n.get("score_min", v.score_min);
      n.get("score_max", v.score_max);
      n.get("p_spurious", v.p_spurious);
      if (n.has("forced_dropouts")) {
        const json& list = n.raw("forced_dropouts");
        const std::string where = n.path("forced_dropouts");
        if (!list.is_array()) throw ConfigError(where + " must be a list of [instance, frame] pairs");
        for (const json& pair : list) {
          if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
              !pair[1].is_number_integer()) {
            throw ConfigError(where + " entries must be [instance, frame] integer pairs");
          }
          v.forced_dropouts.push_back({pair[0].get<int>(), pair[1].get<std::int64_t>()});
        }
      }
      n.finish();
    }
    s.finish();
  }
  root.finish();
  return c;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config " + path.string());
  std::ostringstream text;
  text << in.rdbuf();
  json j;
  try {
    j = json::parse(text.str());
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path.string() + " is not valid JSON: " + e.what());
  }
  return config_from_json(j);
}

}  // namespace trajmine::app
