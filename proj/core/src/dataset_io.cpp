#include "trajmine/dataset_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "trajmine/errors.hpp"

namespace trajmine {

namespace fs = std::filesystem;
using nlohmann::json;

double round6(double value) noexcept {
  if (!std::isfinite(value)) return value;
  const double r = std::round(value * 1e6) / 1e6;
  return r == 0.0 ? 0.0 : r;  // no "-0.0" in output
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string() + ": " + ec.message());
  }
  fs::path tmp = path;
  tmp += ".partial";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw IoError("write failed: " + tmp.string());
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
  }
}

namespace {

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IoError("read failed: " + path.string());
  return ss.str();
}

bool blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c) != 0; });
}

json box_json(const Box& b) { return json::array({round6(b.x1()), round6(b.y1()), round6(b.x2()), round6(b.y2())}); }

json polygon_json(const Polygon& p) {
  json flat = json::array();
  for (const Point2& v : p.vertices) {
    flat.push_back(round6(v.x));
    flat.push_back(round6(v.y));
  }
  return flat;
}

json detection_json(const Detection& d) {
  return json{{"bbox", box_json(d.box)}, {"polygon", polygon_json(d.mask)}, {"score", round6(d.score)}};
}

// Field access for both line-oriented (ParseError/RangeError with a line)
// and whole-document inputs.
struct Reader {
  std::size_t line;

  [[noreturn]] void schema(const std::string& why) const { throw ParseError(line, why); }
  [[noreturn]] void range(const std::string& why) const { throw RangeError(line, why); }

  const json& field(const json& obj, const char* key) const {
    if (!obj.is_object()) schema("expected an object");
    auto it = obj.find(key);
    if (it == obj.end()) schema(std::string("missing field '") + key + "'");
    return *it;
  }

  double number(const json& v, const char* what) const {
    if (!v.is_number()) schema(std::string(what) + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) range(std::string(what) + " must be finite");
    return d;
  }

  std::string string(const json& v, const char* what) const {
    if (!v.is_string()) schema(std::string(what) + " must be a string");
    return v.get<std::string>();
  }

  std::int64_t frame_index(const json& v) const {
    if (!v.is_number_integer()) schema("frame_index must be an integer");
    const auto i = v.get<std::int64_t>();
    if (i < 0) range("frame_index must be >= 0");
    return i;
  }

  double score(const json& v, const char* what) const {
    const double s = number(v, what);
    if (s < 0.0 || s > 1.0) range(std::string(what) + " must lie in [0, 1]");
    return s;
  }

  Box box(const json& v) const {
    if (!v.is_array() || v.size() != 4) schema("bbox must be an array of 4 numbers");
    const double x1 = number(v[0], "bbox"), y1 = number(v[1], "bbox");
    const double x2 = number(v[2], "bbox"), y2 = number(v[3], "bbox");
    auto b = Box::try_make(x1, y1, x2, y2);
    if (!b) range("bbox must satisfy x1 < x2 and y1 < y2");
    return *b;
  }

  Polygon polygon(const json& v) const {
    if (!v.is_array()) schema("polygon must be an array");
    if (v.size() % 2 != 0 || v.size() < 6) schema("polygon needs an even number (>= 6) of coordinates");
    Polygon p;
    p.vertices.reserve(v.size() / 2);
    for (std::size_t i = 0; i < v.size(); i += 2) {
      p.vertices.push_back({number(v[i], "polygon"), number(v[i + 1], "polygon")});
    }
    return p;
  }

  Detection detection(const json& v) const {
    return Detection{box(field(v, "bbox")), polygon(field(v, "polygon")), score(field(v, "score"), "score")};
  }
};

}  // namespace

// ---------------------------------------------------------------------------

DetectionRecord parse_detection_record(const std::string& line, std::size_t line_number) {
  const Reader r{line_number};
  json j;
  try {
    j = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(line_number, std::string("invalid JSON: ") + e.what());
  }
  DetectionRecord rec;
  rec.video_id = r.string(r.field(j, "video_id"), "video_id");
  if (rec.video_id.empty()) r.range("video_id must not be empty");
  rec.frame_index = r.frame_index(r.field(j, "frame_index"));
  const json& dets = r.field(j, "detections");
  if (!dets.is_array()) r.schema("detections must be an array");
  rec.detections.reserve(dets.size());
  for (const json& d : dets) rec.detections.push_back(r.detection(d));
  return rec;
}

std::vector<DetectionRecord> read_detections(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<std::pair<std::size_t, DetectionRecord>> numbered;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (blank(line)) continue;
    numbered.emplace_back(n, parse_detection_record(line, n));
  }
  if (in.bad()) throw IoError("read failed: " + path.string());

  std::stable_sort(numbered.begin(), numbered.end(), [](const auto& a, const auto& b) {
    return std::tie(a.second.video_id, a.second.frame_index) < std::tie(b.second.video_id, b.second.frame_index);
  });
  std::vector<DetectionRecord> out;
  out.reserve(numbered.size());
  for (std::size_t i = 0; i < numbered.size(); ++i) {
    if (i > 0 && numbered[i].second.video_id == out.back().video_id &&
        numbered[i].second.frame_index == out.back().frame_index) {
      throw ParseError(std::max(numbered[i].first, numbered[i - 1].first),
                       "duplicate frame " + std::to_string(numbered[i].second.frame_index) + " for video '" +
                           numbered[i].second.video_id + "'");
    }
    out.push_back(std::move(numbered[i].second));
  }
  return out;
}

std::string dump_detection_record(const DetectionRecord& record) {
  json dets = json::array();
  for (const Detection& d : record.detections) dets.push_back(detection_json(d));
  return json{{"video_id", record.video_id}, {"frame_index", record.frame_index}, {"detections", dets}}.dump();
}

void write_detections(std::span<const DetectionRecord> records, const fs::path& path) {
  std::string text;
  for (const DetectionRecord& r : records) {
    text += dump_detection_record(r);
    text += '\n';
  }
  write_file_atomic(path, text);
}

std::map<std::string, std::vector<DetectionRecord>> group_by_video(std::span<const DetectionRecord> records) {
  std::map<std::string, std::vector<DetectionRecord>> out;
  for (const DetectionRecord& r : records) out[r.video_id].push_back(r);
  return out;
}

// ---------------------------------------------------------------------------

json to_json(const GenloopManifest& m) {
  return json{
      {"source_image", m.source_image},
      {"mode", m.mode},
      {"affine",
       {{"theta_rot", m.affine.theta_rot_deg},
        {"delta", m.affine.scale},
        {"center", {m.affine.center.x, m.affine.center.y}},
        {"translation", {m.affine.translation.x, m.affine.translation.y}}}},
      {"n_unique", m.n_unique},
      {"schedule", m.schedule},
      {"frame_files", m.frame_files},
      {"config", m.config},
  };
}

GenloopManifest manifest_from_json(const json& j) {
  try {
    GenloopManifest m;
    m.source_image = j.at("source_image").get<std::string>();
    m.mode = j.at("mode").get<std::string>();
    const json& a = j.at("affine");
    m.affine.theta_rot_deg = a.at("theta_rot").get<double>();
    m.affine.scale = a.at("delta").get<double>();
    m.affine.center = {a.at("center").at(0).get<double>(), a.at("center").at(1).get<double>()};
    m.affine.translation = {a.at("translation").at(0).get<double>(), a.at("translation").at(1).get<double>()};
    m.n_unique = j.at("n_unique").get<int>();
    m.schedule = j.at("schedule").get<std::vector<int>>();
    m.frame_files = j.at("frame_files").get<std::vector<std::string>>();
    if (auto it = j.find("config"); it != j.end()) m.config = *it;
    if (m.n_unique < 1 || static_cast<std::size_t>(m.n_unique) != m.frame_files.size()) {
      throw IoError("manifest: frame_files must list n_unique entries");
    }
    for (int p : m.schedule) {
      if (p < 0 || p >= m.n_unique) throw IoError("manifest: schedule entry out of range");
    }
    return m;
  } catch (const json::exception& e) {
    throw IoError(std::string("malformed manifest: ") + e.what());
  }
}

GenloopManifest read_manifest(const fs::path& path) {
  try {
    return manifest_from_json(json::parse(read_text(path)));
  } catch (const json::parse_error& e) {
    throw IoError("malformed manifest " + path.string() + ": " + e.what());
  }
}

void write_manifest(const GenloopManifest& manifest, const fs::path& path) {
  write_file_atomic(path, to_json(manifest).dump(2) + "\n");
}

// ---------------------------------------------------------------------------

FrameSource FrameSource::open(const fs::path& source) {
  FrameSource fs_;
  std::error_code ec;
  if (fs::is_regular_file(source, ec)) {
    const GenloopManifest m = read_manifest(source);
    const fs::path base = source.parent_path();
    for (const std::string& f : m.frame_files) fs_.files_.push_back(base / f);
    for (int p : m.schedule) fs_.positions_.push_back(static_cast<std::size_t>(p));
    fs_.manifest_ = true;
    return fs_;
  }
  if (!fs::is_directory(source, ec)) throw IoError("frame source not found: " + source.string());

  std::map<std::int64_t, fs::path> numbered;
  for (const auto& entry : fs::directory_iterator(source, ec)) {
    if (!entry.is_regular_file()) continue;
    const fs::path& p = entry.path();
    if (p.extension() != ".png") continue;
    const std::string stem = p.stem().string();
    if (stem.empty() || stem.size() > 18 ||
        !std::all_of(stem.begin(), stem.end(), [](unsigned char c) { return std::isdigit(c) != 0; })) {
      continue;
    }
    numbered.emplace(std::stoll(stem), p);
  }
  if (ec) throw IoError("cannot list " + source.string() + ": " + ec.message());
  std::int64_t expect = 0;
  for (auto& [index, path] : numbered) {
    if (index != expect) throw MissingFrame(expect);
    fs_.positions_.push_back(fs_.files_.size());
    fs_.files_.push_back(path);
    ++expect;
  }
  return fs_;
}

std::size_t FrameSource::resolve(std::int64_t index) const {
  if (index < 0 || index >= size()) throw MissingFrame(index);
  return positions_[static_cast<std::size_t>(index)];
}

std::vector<DetectionRecord> broadcast_detections(std::span<const DetectionRecord> unique_records,
                                                  std::span<const std::size_t> positions, std::size_t n_unique) {
  std::vector<const DetectionRecord*> by_unique(n_unique, nullptr);
  for (const DetectionRecord& r : unique_records) {
    if (r.frame_index < 0 || static_cast<std::size_t>(r.frame_index) >= n_unique) throw MissingFrame(r.frame_index);
    by_unique[static_cast<std::size_t>(r.frame_index)] = &r;
  }
  std::vector<DetectionRecord> out;
  for (std::size_t p = 0; p < positions.size(); ++p) {
    const DetectionRecord* r = positions[p] < n_unique ? by_unique[positions[p]] : nullptr;
    if (!r) continue;
    out.push_back(*r);
    out.back().frame_index = static_cast<std::int64_t>(p);
  }
  return out;
}

std::shared_ptr<const Image> FrameSource::load(std::int64_t index) const {
  const std::size_t file = resolve(index);
  if (!manifest_) return std::make_shared<const Image>(read_png(files_[file]));
  std::lock_guard lock(*cache_mutex_);
  auto& slot = (*cache_)[file];
  if (!slot) slot = std::make_shared<const Image>(read_png(files_[file]));
  return slot;
}

// ---------------------------------------------------------------------------

std::string dump_pseudo_dataset(const PseudoDataset& dataset) {
  json frames = json::array();
  for (const PseudoFrame& f : dataset.frames) {
    json labels = json::array();
    for (const PseudoLabel& l : f.labels) {
      labels.push_back({{"bbox", box_json(l.box)},
                        {"polygon", polygon_json(l.mask)},
                        {"soft_label", round6(l.soft_label)},
                        {"provenance", to_string(l.provenance)},
                        {"score", round6(l.score)}});
    }
    json negatives = json::array();
    for (const Detection& d : f.hard_negatives) negatives.push_back(detection_json(d));
    frames.push_back({{"video_id", f.video_id},
                      {"frame_index", f.frame_index},
                      {"labels", labels},
                      {"hard_negatives", negatives}});
  }
  return json{{"meta", dataset.meta}, {"frames", frames}}.dump(2) + "\n";
}

PseudoDataset parse_pseudo_dataset(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(1, std::string("invalid JSON: ") + e.what());
  }
  const Reader r{1};
  PseudoDataset ds;
  ds.meta = r.field(j, "meta");
  const json& frames = r.field(j, "frames");
  if (!frames.is_array()) r.schema("frames must be an array");
  for (const json& fj : frames) {
    PseudoFrame f;
    f.video_id = r.string(r.field(fj, "video_id"), "video_id");
    f.frame_index = r.frame_index(r.field(fj, "frame_index"));
    const json& labels = r.field(fj, "labels");
    if (!labels.is_array()) r.schema("labels must be an array");
    for (const json& lj : labels) {
      const std::string prov = r.string(r.field(lj, "provenance"), "provenance");
      Provenance p;
      if (prov == "det") p = Provenance::Detection;
      else if (prov == "hp") p = Provenance::HardPositive;
      else r.range("provenance must be 'det' or 'hp'");
      f.labels.push_back(PseudoLabel{r.box(r.field(lj, "bbox")), r.polygon(r.field(lj, "polygon")),
                                     r.score(r.field(lj, "soft_label"), "soft_label"), p,
                                     r.number(r.field(lj, "score"), "score")});
    }
    const json& negatives = r.field(fj, "hard_negatives");
    if (!negatives.is_array()) r.schema("hard_negatives must be an array");
    for (const json& nj : negatives) f.hard_negatives.push_back(r.detection(nj));
    ds.frames.push_back(std::move(f));
  }
  return ds;
}

void write_pseudo_dataset(const PseudoDataset& dataset, const fs::path& path) {
  write_file_atomic(path, dump_pseudo_dataset(dataset));
}

PseudoDataset read_pseudo_dataset(const fs::path& path) { return parse_pseudo_dataset(read_text(path)); }

}  // namespace trajmine
