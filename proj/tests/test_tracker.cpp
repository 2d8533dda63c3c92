#include <gtest/gtest.h>

#include <cmath>

#include "oracles/ncc_oracle.hpp"
#include "trajmine/errors.hpp"
#include "trajmine/random.hpp"
#include "trajmine/tracker.hpp"
#include "trajmine/trajectory.hpp"

using namespace trajmine;

namespace {

Image noise_image(int w, int h, std::uint64_t seed, int lo = 0, int hi = 255) {
  Rng rng(seed);
  Image img(w, h, 1);
  for (auto& p : img.pixels) p = static_cast<std::uint8_t>(rng.uniform_int(lo, hi));
  return img;
}

void paste(Image& dst, const Image& src, int sx, int sy, int w, int h, int dx, int dy) {
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) dst.at(dx + x, dy + y) = src.at(sx + x, sy + y);
}

TrajectoryEntry entry_at(std::int64_t frame, const Box& box) {
  return TrajectoryEntry{frame, box, std::nullopt, EntryKind::Detection, 1.0, 0};
}

TrackerError::Kind kind_of(const auto& fn) {
  try {
    fn();
  } catch (const TrackerError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected TrackerError";
  return TrackerError::Kind::EmptyPatch;
}

}  // namespace

TEST(ExtractPatch, InteriorCrop) {
  const Image img = noise_image(64, 48, 1);
  const Patch p = extract_patch(img, Box(10, 5, 30, 15));
  EXPECT_EQ(p.width, 20);
  EXPECT_EQ(p.height, 10);
  EXPECT_DOUBLE_EQ(p.at(0, 0), img.at(10, 5));
  EXPECT_DOUBLE_EQ(p.at(19, 9), img.at(29, 14));
}

TEST(ExtractPatch, ClipsToFrame) {
  const Image img = noise_image(64, 48, 1);
  const Patch p = extract_patch(img, Box(-10, 40, 10, 60));
  EXPECT_EQ(p.width, 10);
  EXPECT_EQ(p.height, 8);
  EXPECT_EQ(p.origin, Box(0, 40, 10, 48));
}

TEST(ExtractPatch, OutsideThrowsEmptyPatch) {
  const Image img = noise_image(64, 48, 1);
  EXPECT_EQ(kind_of([&] { extract_patch(img, Box(100, 100, 120, 120)); }), TrackerError::Kind::EmptyPatch);
}

TEST(NccMatch, VerbatimCopyAtOffset) {
  const Image src = noise_image(64, 64, 2);
  const Patch t = extract_patch(src, Box(20, 20, 36, 32));
  Image frame = noise_image(64, 64, 3);
  paste(frame, src, 20, 20, 16, 12, 23, 24);
  const MatchPeak m = ncc_match(t, frame, Box(0, 0, 64, 64));
  EXPECT_EQ(m.box, Box(23, 24, 39, 36));
  EXPECT_NEAR(m.score, 1.0, 1e-9);
}

TEST(NccMatch, ConstantFrameIsZeroVariance) {
  const Patch t = extract_patch(noise_image(32, 32, 4), Box(4, 4, 12, 12));
  const Image flat(32, 32, 1, 90);
  EXPECT_EQ(kind_of([&] { ncc_match(t, flat, Box(0, 0, 32, 32)); }), TrackerError::Kind::ZeroVariance);
}

TEST(NccMatch, FlatTemplateIsZeroVariance) {
  const Patch t = extract_patch(Image(32, 32, 1, 10), Box(4, 4, 12, 12));
  EXPECT_EQ(kind_of([&] { ncc_match(t, noise_image(32, 32, 5), Box(0, 0, 32, 32)); }),
            TrackerError::Kind::ZeroVariance);
}

TEST(NccMatch, SearchSmallerThanTemplate) {
  const Image img = noise_image(32, 32, 6);
  const Patch t = extract_patch(img, Box(0, 0, 16, 16));
  EXPECT_EQ(kind_of([&] { ncc_match(t, img, Box(0, 0, 10, 10)); }), TrackerError::Kind::SearchTooSmall);
}

TEST(NccMatch, InvariantToPositiveAffineIntensity) {
  Image src = noise_image(48, 48, 7, 20, 150);
  for (auto& v : src.pixels) v &= 0xfe;  // even, so 1.5 * v stays integral
  const Patch t = extract_patch(src, Box(10, 12, 26, 24));
  Image frame = noise_image(48, 48, 8);
  for (int y = 0; y < 12; ++y)
    for (int x = 0; x < 16; ++x) {
      frame.at(15 + x, 20 + y) = static_cast<std::uint8_t>(1.5 * src.at(10 + x, 12 + y) + 10);  // <= 235
    }
  const MatchPeak m = ncc_match(t, frame, Box(0, 0, 48, 48));
  EXPECT_EQ(m.box, Box(15, 20, 31, 32));
  EXPECT_NEAR(m.score, 1.0, 1e-9);
  EXPECT_NEAR(oracle::ncc_at(t, frame, 15, 20), 1.0, 1e-9);
}

TEST(NccMatch, AgreesWithDirectEvaluation) {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    const Image a = noise_image(24, 20, 100 + seed, 0, 7);
    const Image b = noise_image(24, 20, 200 + seed, 0, 7);
    const Patch t = extract_patch(a, Box(3, 4, 9, 9));
    const MatchPeak m = ncc_match(t, b, Box(2, 1, 22, 19));
    const auto ref = oracle::brute_force(t, b, 2, 1, 22, 19);
    ASSERT_TRUE(ref.any);
    EXPECT_NEAR(m.score, ref.score, 1e-9) << "seed " << seed;
    EXPECT_NEAR(oracle::ncc_at(t, b, static_cast<int>(m.box.x1()), static_cast<int>(m.box.y1())), ref.score, 1e-9);
  }
}

TEST(SearchRegion, MarginAndClipping) {
  const TrackerConfig cfg;
  const auto r = search_region(Box(50, 50, 60, 60), 200, 200, cfg);
  ASSERT_TRUE(r);
  EXPECT_EQ(*r, Box(34, 34, 76, 76));  // max(1.0 * 10, 16) on each side
  const auto edge = search_region(Box(0, 0, 40, 10), 100, 100, cfg);
  ASSERT_TRUE(edge);
  EXPECT_EQ(*edge, Box(0, 0, 80, 26));
}

TEST(NccTracker, FollowsTranslatedInstance) {
  const Image bg = noise_image(120, 90, 9);
  const Image obj = noise_image(30, 14, 10);
  Image f0 = bg, f1 = bg;
  paste(f0, obj, 0, 0, 30, 14, 40, 30);
  paste(f1, obj, 0, 0, 30, 14, 43, 34);
  const NccTracker tracker;
  const Box box(40, 30, 70, 44);
  const auto patch = tracker.capture(FrameRef{0, &f0}, box);
  ASSERT_TRUE(patch);
  const auto r = tracker.track(entry_at(0, box), patch.get(), FrameRef{1, &f1});
  ASSERT_TRUE(r);
  EXPECT_EQ(r->box, Box(43, 34, 73, 48));
  EXPECT_NEAR(r->track_score, 1.0, 1e-9);
  EXPECT_EQ(r->frame_index, 1);
}

TEST(NccTracker, LostInstanceGivesNoResult) {
  const Image bg = noise_image(120, 90, 11);
  const Image obj = noise_image(30, 14, 12);
  Image f0 = bg;
  paste(f0, obj, 0, 0, 30, 14, 40, 30);
  const Image f1 = noise_image(120, 90, 13);
  const Box box(40, 30, 70, 44);
  const NccTracker tracker;
  const auto patch = tracker.capture(FrameRef{0, &f0}, box);
  const auto search = search_region(box, 120, 90, tracker.config());
  ASSERT_TRUE(search);
  const auto ref = oracle::brute_force(*patch, f1, static_cast<int>(search->x1()), static_cast<int>(search->y1()),
                                       static_cast<int>(search->x2()), static_cast<int>(search->y2()));
  ASSERT_LT(ref.score, 0.6);
  EXPECT_FALSE(tracker.track(entry_at(0, box), patch.get(), FrameRef{1, &f1}));
}

TEST(NccTracker, EdgeBoxStaysInBounds) {
  const Image bg = noise_image(80, 60, 14);
  const Image obj = noise_image(20, 10, 15);
  Image f0 = bg, f1 = bg;
  paste(f0, obj, 0, 0, 20, 10, 0, 0);
  paste(f1, obj, 0, 0, 20, 10, 2, 1);
  const NccTracker tracker;
  const Box box(0, 0, 20, 10);
  const auto patch = tracker.capture(FrameRef{0, &f0}, box);
  const auto r = tracker.track(entry_at(0, box), patch.get(), FrameRef{1, &f1});
  ASSERT_TRUE(r);
  EXPECT_GE(r->box.x1(), 0);
  EXPECT_GE(r->box.y1(), 0);
  EXPECT_LE(r->box.x2(), 80);
  EXPECT_LE(r->box.y2(), 60);
  EXPECT_EQ(r->box, Box(2, 1, 22, 11));
}

TEST(NccTracker, PixelFreeFrameGivesNoResult) {
  const NccTracker tracker;
  const Image img = noise_image(40, 40, 16);
  const Box box(5, 5, 15, 15);
  const auto patch = tracker.capture(FrameRef{0, &img}, box);
  EXPECT_FALSE(tracker.track(entry_at(0, box), patch.get(), FrameRef{1, nullptr}));
  EXPECT_FALSE(tracker.track(entry_at(0, box), nullptr, FrameRef{1, &img}));
}

TEST(NccTracker, RefreshesStaleTemplate) {
  TrackerConfig cfg;
  cfg.max_template_age = 2;
  const NccTracker tracker(cfg);
  const Image img = noise_image(60, 60, 17);
  const Box box(20, 20, 35, 30);
  const auto patch = tracker.capture(FrameRef{0, &img}, box);
  const auto fresh = tracker.track(entry_at(1, box), patch.get(), FrameRef{2, &img});
  ASSERT_TRUE(fresh);
  EXPECT_FALSE(fresh->appearance);
  const auto stale = tracker.track(entry_at(2, box), patch.get(), FrameRef{3, &img});
  ASSERT_TRUE(stale);
  ASSERT_TRUE(stale->appearance);
  EXPECT_EQ(stale->appearance->frame_index, 3);
}

TEST(TrackerConfig, Validation) {
  TrackerConfig cfg;
  cfg.tau_track = 1.5;
  EXPECT_THROW(cfg.validate(), ConfigError);
  cfg = {};
  cfg.margin = -1;
  EXPECT_THROW(cfg.validate(), ConfigError);
}
