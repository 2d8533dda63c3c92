#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "support/generators.hpp"
#include "trajmine/dataset_io.hpp"
#include "trajmine/errors.hpp"
#include "trajmine/genloop.hpp"

using namespace trajmine;
namespace fs = std::filesystem;

namespace {

class TempDir : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("trajmine_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  fs::path write(const std::string& name, const std::string& text) const {
    const fs::path p = dir_ / name;
    std::ofstream(p) << text;
    return p;
  }

  static std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
  }

  fs::path dir_;
};

const char* kLine =
    R"({"video_id":"a","frame_index":0,"detections":[{"bbox":[1,2,11,12],"polygon":[1,2,11,2,11,12,1,12],"score":0.9}]})";

std::size_t parse_error_line(const std::string& line) {
  try {
    parse_detection_record(line, 7);
  } catch (const ParseError& e) {
    return e.line();
  } catch (const RangeError& e) {
    return 1000 + e.line();
  }
  return 0;
}

}  // namespace

TEST(Round6, RoundsAndDropsNegativeZero) {
  EXPECT_DOUBLE_EQ(round6(1.23456789), 1.234568);
  EXPECT_DOUBLE_EQ(round6(-1e-9), 0.0);
  EXPECT_FALSE(std::signbit(round6(-1e-9)));
  EXPECT_DOUBLE_EQ(round6(round6(0.1234565)), round6(0.1234565));
}

TEST(ParseDetectionRecord, WellFormed) {
  const DetectionRecord r = parse_detection_record(kLine, 1);
  EXPECT_EQ(r.video_id, "a");
  EXPECT_EQ(r.frame_index, 0);
  ASSERT_EQ(r.detections.size(), 1u);
  EXPECT_EQ(r.detections[0].box, Box(1, 2, 11, 12));
  EXPECT_EQ(r.detections[0].mask.vertices.size(), 4u);
  EXPECT_DOUBLE_EQ(r.detections[0].score, 0.9);
}

TEST(ParseDetectionRecord, SchemaErrorsCarryLine) {
  EXPECT_EQ(parse_error_line("not json"), 7u);
  EXPECT_EQ(parse_error_line(R"({"video_id":"a","frame_index":0})"), 7u);
  EXPECT_EQ(parse_error_line(R"({"video_id":"a","frame_index":0,"detections":[{"bbox":[1,2,3],"polygon":[],"score":1}]})"), 7u);
  EXPECT_EQ(parse_error_line(R"({"video_id":"a","frame_index":0,"detections":[{"bbox":[0,0,1,1],"polygon":[0,0,1,1],"score":1}]})"), 7u);
  EXPECT_EQ(parse_error_line(R"({"video_id":"a","frame_index":1.5,"detections":[]})"), 7u);
}

TEST(ParseDetectionRecord, RangeErrors) {
  EXPECT_EQ(parse_error_line(R"({"video_id":"a","frame_index":-1,"detections":[]})"), 1007u);
  EXPECT_EQ(parse_error_line(R"({"video_id":"a","frame_index":0,"detections":[{"bbox":[5,0,1,1],"polygon":[0,0,1,0,1,1],"score":1}]})"), 1007u);
  EXPECT_EQ(parse_error_line(R"({"video_id":"a","frame_index":0,"detections":[{"bbox":[0,0,1,1],"polygon":[0,0,1,0,1,1],"score":1.5}]})"), 1007u);
}

TEST_F(TempDir, ReadThreeLines) {
  std::string text;
  for (int f = 0; f < 3; ++f) {
    text += R"({"video_id":"a","frame_index":)" + std::to_string(2 - f) + R"(,"detections":[]})" + "\n";
  }
  const auto recs = read_detections(write("d.jsonl", text));
  ASSERT_EQ(recs.size(), 3u);
  for (int f = 0; f < 3; ++f) EXPECT_EQ(recs[f].frame_index, f);
}

TEST_F(TempDir, MissingScoreOnLineTwo) {
  const std::string bad =
      R"({"video_id":"a","frame_index":1,"detections":[{"bbox":[1,2,11,12],"polygon":[1,2,11,2,11,12,1,12]}]})";
  try {
    read_detections(write("d.jsonl", std::string(kLine) + "\n" + bad + "\n"));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST_F(TempDir, EmptyFileAndBlankLines) {
  EXPECT_TRUE(read_detections(write("e.jsonl", "")).empty());
  EXPECT_EQ(read_detections(write("b.jsonl", "\n" + std::string(kLine) + "\n  \n")).size(), 1u);
}

TEST_F(TempDir, DuplicateFrameRejected) {
  EXPECT_THROW(read_detections(write("d.jsonl", std::string(kLine) + "\n" + kLine + "\n")), ParseError);
}

TEST_F(TempDir, MissingFileIsIoError) { EXPECT_THROW(read_detections(dir_ / "nope.jsonl"), IoError); }

TEST_F(TempDir, DetectionsRoundTrip) {
  Rng rng(3);
  std::vector<DetectionRecord> recs;
  for (int f = 0; f < 10; ++f) {
    DetectionRecord r{f < 5 ? "a" : "b", f, {}};
    for (int k = 0; k < 3; ++k) r.detections.push_back(support::random_detection(rng));
    recs.push_back(r);
  }
  const fs::path p = dir_ / "out.jsonl";
  write_detections(recs, p);
  EXPECT_EQ(read_detections(p), recs);
  const auto groups = group_by_video(recs);
  ASSERT_EQ(groups.size(), 2u);
  EXPECT_EQ(groups.at("a").size(), 5u);
}

TEST_F(TempDir, FrameDirectory) {
  const Image img(4, 3, 1, 9);
  for (int i = 0; i < 5; ++i) {
    char name[16];
    std::snprintf(name, sizeof name, "%06d.png", i);
    write_png(img, dir_ / name);
  }
  write("notes.txt", "ignored");
  const FrameSource src = FrameSource::open(dir_);
  EXPECT_EQ(src.size(), 5);
  EXPECT_FALSE(src.from_manifest());
  for (int i = 0; i < 5; ++i) EXPECT_EQ(src.resolve(i), static_cast<std::size_t>(i));
  EXPECT_EQ(*src.load(4), img);
  EXPECT_THROW(src.load(5), MissingFrame);
}

TEST_F(TempDir, GapInNumbering) {
  const Image img(4, 3, 1, 9);
  write_png(img, dir_ / "000000.png");
  write_png(img, dir_ / "000002.png");
  try {
    FrameSource::open(dir_);
    FAIL() << "expected MissingFrame";
  } catch (const MissingFrame& e) {
    EXPECT_EQ(e.index(), 1);
  }
}

TEST_F(TempDir, ManifestResolvesThroughSchedule) {
  LoopSpec spec;
  spec.n_unique = 17;
  const FrameSchedule schedule = build_frame_schedule(spec);
  GenloopManifest m;
  m.source_image = "src.png";
  m.mode = "loop";
  m.n_unique = 17;
  m.schedule = schedule.positions;
  for (int k = 0; k < 17; ++k) {
    m.frame_files.push_back("u" + std::to_string(k) + ".png");
    write_png(Image(3, 3, 1, static_cast<std::uint8_t>(k)), dir_ / m.frame_files.back());
  }
  write_manifest(m, dir_ / "manifest.json");
  const FrameSource src = FrameSource::open(dir_ / "manifest.json");
  EXPECT_TRUE(src.from_manifest());
  EXPECT_EQ(src.size(), 49);
  // Positions 0..16 run forward, 17..32 run back from 15 to 0.
  EXPECT_EQ(src.resolve(20), 12u);
  EXPECT_EQ(src.load(20)->at(0, 0), 12);
  EXPECT_EQ(src.load(20).get(), src.load(12).get());
}

TEST_F(TempDir, ManifestRoundTrip) {
  GenloopManifest m;
  m.source_image = "x.png";
  m.mode = "straight";
  m.affine = AffineParams{12.345678901, 1.1, {3.25, 4.5}, {0, 0}};
  m.n_unique = 2;
  m.schedule = {0, 1};
  m.frame_files = {"000000.png", "000001.png"};
  m.config = {{"seed", 4}};
  const fs::path p = dir_ / "m.json";
  write_manifest(m, p);
  const GenloopManifest back = read_manifest(p);
  EXPECT_EQ(back.affine, m.affine);
  EXPECT_EQ(back.schedule, m.schedule);
  EXPECT_EQ(back.config, m.config);
  EXPECT_THROW(read_manifest(write("bad.json", "{}")), IoError);
}

TEST_F(TempDir, PseudoDatasetRoundTrip) {
  Rng rng(8);
  for (int trial = 0; trial < 20; ++trial) {
    const PseudoDataset ds = support::random_dataset(rng);
    const fs::path p = dir_ / "ds.json";
    write_pseudo_dataset(ds, p);
    EXPECT_EQ(read_pseudo_dataset(p), ds);
  }
}

TEST_F(TempDir, EmptyDatasetIsValid) {
  PseudoDataset ds;
  ds.meta = {{"tool_version", kToolVersion}};
  const std::string text = dump_pseudo_dataset(ds);
  const PseudoDataset back = parse_pseudo_dataset(text);
  EXPECT_TRUE(back.frames.empty());
  EXPECT_EQ(back.meta, ds.meta);
}

TEST_F(TempDir, SameInputsSameBytes) {
  Rng a(77), b(77);
  write_pseudo_dataset(support::random_dataset(a), dir_ / "1.json");
  write_pseudo_dataset(support::random_dataset(b), dir_ / "2.json");
  EXPECT_EQ(slurp(dir_ / "1.json"), slurp(dir_ / "2.json"));
  EXPECT_FALSE(fs::exists(dir_ / "1.json.partial"));
}

TEST(PseudoDataset, RejectsBadProvenance) {
  const std::string text = R"({"meta":{},"frames":[{"video_id":"a","frame_index":0,"hard_negatives":[],
    "labels":[{"bbox":[0,0,1,1],"polygon":[0,0,1,0,1,1],"soft_label":1,"provenance":"xx","score":1}]}]})";
  EXPECT_THROW(parse_pseudo_dataset(text), RangeError);
}

TEST(PseudoDataset, KeysSortedCoordinatesRounded) {
  PseudoDataset ds;
  ds.meta = {{"zeta", 1}, {"alpha", 2}};
  PseudoFrame f;
  f.video_id = "v";
  f.labels.push_back({Box(0.1234567, 0, 1, 1), box_polygon(Box(0, 0, 1, 1)), 1.0, Provenance::HardPositive, 0.5});
  ds.frames.push_back(f);
  const std::string text = dump_pseudo_dataset(ds);
  EXPECT_LT(text.find("\"alpha\""), text.find("\"zeta\""));
  EXPECT_NE(text.find("0.123457"), std::string::npos);
  EXPECT_EQ(text.find("0.1234567"), std::string::npos);
  EXPECT_EQ(text.back(), '\n');
}

TEST(BroadcastDetections, CopiesEachUniqueRecordToItsPositions) {
  // Loop schedule for n = 3: 0 1 2 1 0 1 2.
  const std::vector<std::size_t> positions{0, 1, 2, 1, 0, 1, 2};
  DetectionRecord a{"v", 0, {Detection{Box(0, 0, 4, 4), box_polygon(Box(0, 0, 4, 4)), 0.9}}};
  DetectionRecord c{"v", 2, {Detection{Box(5, 5, 9, 9), box_polygon(Box(5, 5, 9, 9)), 0.8}}};
  const std::vector<DetectionRecord> unique{a, c};
  const auto out = broadcast_detections(unique, positions, 3);
  ASSERT_EQ(out.size(), 4u);
  const std::int64_t expect_frames[] = {0, 2, 4, 6};
  for (std::size_t i = 0; i < out.size(); ++i) {
    EXPECT_EQ(out[i].frame_index, expect_frames[i]);
    EXPECT_EQ(out[i].detections, (positions[static_cast<std::size_t>(out[i].frame_index)] == 0 ? a : c).detections);
  }
}

TEST(BroadcastDetections, UniqueIndexOutOfRangeIsMissingFrame) {
  const std::vector<std::size_t> positions{0, 1, 0};
  const std::vector<DetectionRecord> unique{DetectionRecord{"v", 2, {}}};
  EXPECT_THROW(broadcast_detections(unique, positions, 2), MissingFrame);
}
