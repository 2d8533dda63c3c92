#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>

#include "oracles/matching_oracle.hpp"
#include "trajmine/errors.hpp"
#include "trajmine/random.hpp"
#include "trajmine/tmm.hpp"

using namespace trajmine;

namespace {

MatchMatrix make(const std::vector<std::vector<double>>& rows) {
  MatchMatrix m(rows.size(), rows.empty() ? 0 : rows[0].size());
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m.set(i, j, rows[i][j]);
  return m;
}

std::vector<std::vector<double>> random_grid(Rng& rng, std::size_t r, std::size_t c, bool on_grid) {
  std::vector<std::vector<double>> v(r, std::vector<double>(c));
  for (auto& row : v)
    for (auto& x : row) x = on_grid ? static_cast<double>(rng.uniform_int(0, 10)) / 10.0 : rng.uniform();
  return v;
}

}  // namespace

TEST(ScorePair, Identity) {
  const Box b(0, 0, 10, 10);
  EXPECT_DOUBLE_EQ(score_pair(b, b, b), 1.0);
}

TEST(ScorePair, Disjoint) {
  EXPECT_DOUBLE_EQ(score_pair(Box(0, 0, 1, 1), Box(5, 5, 6, 6), Box(8, 8, 9, 9)), 0.0);
}

TEST(ScorePair, TakesTheLargerOverlap) {
  const Box d(0, 0, 10, 10);
  const Box t(0, 0, 10, 2);     // IoU 0.2
  const Box last(0, 0, 10, 6);  // IoU 0.6
  ASSERT_NEAR(iou(d, t), 0.2, 1e-12);
  ASSERT_NEAR(iou(d, last), 0.6, 1e-12);
  EXPECT_NEAR(score_pair(d, t, last), 0.6, 1e-12);
  EXPECT_NEAR(score_pair(d, std::nullopt, last), 0.6, 1e-12);
}

TEST(BuildMatchMatrix, EmptyDetections) {
  const std::vector<Box> dets;
  const std::vector<std::optional<Box>> tracked{Box(0, 0, 1, 1), std::nullopt};
  const std::vector<Box> last{Box(0, 0, 1, 1), Box(2, 2, 3, 3)};
  const MatchMatrix m = build_match_matrix(dets, tracked, last);
  EXPECT_EQ(m.rows(), 0u);
  EXPECT_EQ(m.cols(), 2u);
}

TEST(BuildMatchMatrix, SingleIdentity) {
  const std::vector<Box> dets{Box(0, 0, 4, 4)};
  const std::vector<std::optional<Box>> tracked{std::nullopt};
  const std::vector<Box> last{Box(0, 0, 4, 4)};
  const MatchMatrix m = build_match_matrix(dets, tracked, last);
  ASSERT_EQ(m.rows(), 1u);
  ASSERT_EQ(m.cols(), 1u);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 1.0);
}

TEST(BuildMatchMatrix, CellsAreIndependentScores) {
  const std::vector<Box> dets{Box(0, 0, 10, 10), Box(20, 0, 30, 10)};
  const std::vector<std::optional<Box>> tracked{Box(2, 0, 12, 10), std::nullopt};
  const std::vector<Box> last{Box(0, 1, 10, 11), Box(18, 0, 28, 10)};
  const MatchMatrix m = build_match_matrix(dets, tracked, last);
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      const double a = tracked[j] ? iou(dets[i], *tracked[j]) : 0.0;
      EXPECT_DOUBLE_EQ(m.at(i, j), std::max(a, iou(dets[i], last[j])));
    }
}

TEST(MatchMatrix, SuppressedCellsReadZero) {
  MatchMatrix m = make({{0.9, 0.6}, {0.8, 0.1}});
  m.suppress(0, 0);
  EXPECT_DOUBLE_EQ(m.at(0, 0), 0.0);
  EXPECT_DOUBLE_EQ(m.raw(0, 0), 0.9);
  m.suppress_col(1);
  EXPECT_TRUE(m.suppressed(1, 1));
}

TEST(ResolveMatches, SingleMutualBest) {
  const MatchResult r = resolve_matches(make({{0.8}}), 0.5);
  ASSERT_EQ(r.det_to_traj.size(), 1u);
  EXPECT_EQ(r.det_to_traj[0], 0u);
  EXPECT_TRUE(r.unmatched.empty());
}

TEST(ResolveMatches, BelowThreshold) {
  const MatchResult r = resolve_matches(make({{0.4}}), 0.5);
  EXPECT_FALSE(r.det_to_traj[0]);
  EXPECT_EQ(r.unmatched, std::vector<std::size_t>{0});
}

TEST(ResolveMatches, NonMutualFallsBackBelowThreshold) {
  const auto rows = std::vector<std::vector<double>>{{0.9, 0.6}, {0.8, 0.1}};
  const MatchResult r = resolve_matches(make(rows), 0.5);
  EXPECT_EQ(r.det_to_traj[0], 0u);
  EXPECT_FALSE(r.det_to_traj[1]);
  EXPECT_EQ(r.unmatched, std::vector<std::size_t>{1});
  const auto ref = oracle::suppress_and_research(rows, 0.5);
  EXPECT_EQ(r.det_to_traj, ref.det_to_traj);
}

TEST(ResolveMatches, GreedyDiffersOnContention) {
  // Trajectory 0 comes first and claims detection 1, which trajectory 1
  // prefers; mutual-best keeps the pairs aligned.
  const auto m = make({{0.0, 0.0}, {0.7, 0.95}});
  const MatchResult mb = resolve_matches(m, 0.5);
  EXPECT_FALSE(mb.det_to_traj[0]);
  EXPECT_EQ(mb.det_to_traj[1], 1u);
  const MatchResult g = resolve_matches_greedy(m, 0.5);
  EXPECT_EQ(g.det_to_traj[1], 0u);
  EXPECT_EQ(resolve(m, 0.5, MatchingStrategy::Greedy), g);
  EXPECT_EQ(resolve(m, 0.5, MatchingStrategy::MutualBest), mb);
}

TEST(ResolveMatches, AgreesWithOracleOnGridMatrices) {
  Rng rng(21);
  for (int trial = 0; trial < 2000; ++trial) {
    const auto r = static_cast<std::size_t>(rng.uniform_int(0, 6));
    const auto c = static_cast<std::size_t>(rng.uniform_int(0, 6));
    const auto rows = random_grid(rng, r, c, true);
    const double theta = static_cast<double>(rng.uniform_int(0, 9)) / 10.0;
    MatchMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
      for (std::size_t j = 0; j < c; ++j) m.set(i, j, rows[i][j]);
    ASSERT_EQ(resolve_matches(m, theta).det_to_traj, oracle::suppress_and_research(rows, theta).det_to_traj)
        << "trial " << trial;
  }
}

TEST(ResolveMatches, Injective) {
  Rng rng(22);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto r = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto c = static_cast<std::size_t>(rng.uniform_int(1, 8));
    const auto rows = random_grid(rng, r, c, trial % 2 == 0);
    for (auto strategy : {MatchingStrategy::MutualBest, MatchingStrategy::Greedy}) {
      const MatchResult res = resolve(make(rows), 0.3, strategy);
      std::set<std::size_t> cols;
      std::size_t matched = 0;
      for (std::size_t i = 0; i < r; ++i) {
        if (!res.det_to_traj[i]) continue;
        ++matched;
        EXPECT_TRUE(cols.insert(*res.det_to_traj[i]).second);
        EXPECT_GT(rows[i][*res.det_to_traj[i]], 0.3);
      }
      EXPECT_EQ(matched + res.unmatched.size(), r);
      EXPECT_TRUE(std::is_sorted(res.unmatched.begin(), res.unmatched.end()));
    }
  }
}

TEST(ResolveMatches, RowOrderInvariant) {
  Rng rng(23);
  for (int trial = 0; trial < 500; ++trial) {
    const auto r = static_cast<std::size_t>(rng.uniform_int(1, 7));
    const auto c = static_cast<std::size_t>(rng.uniform_int(1, 7));
    const auto rows = random_grid(rng, r, c, false);
    std::vector<std::size_t> perm(r);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = r; i > 1; --i) std::swap(perm[i - 1], perm[static_cast<std::size_t>(rng.uniform_int(0, i - 1))]);
    std::vector<std::vector<double>> shuffled(r);
    for (std::size_t i = 0; i < r; ++i) shuffled[i] = rows[perm[i]];

    const MatchResult a = resolve_matches(make(rows), 0.4);
    const MatchResult b = resolve_matches(make(shuffled), 0.4);
    for (std::size_t i = 0; i < r; ++i) EXPECT_EQ(b.det_to_traj[i], a.det_to_traj[perm[i]]);
  }
}

TEST(MatchingStrategy, ParseNames) {
  EXPECT_EQ(parse_matching_strategy("mutual-best"), MatchingStrategy::MutualBest);
  EXPECT_EQ(parse_matching_strategy("greedy"), MatchingStrategy::Greedy);
  EXPECT_STREQ(to_string(MatchingStrategy::Greedy), "greedy");
  EXPECT_THROW(parse_matching_strategy("hungarian"), ConfigError);
}
