#include <algorithm>
#include <numeric>

#include "trajmine/errors.hpp"
#include "trajmine/tmm.hpp"

namespace trajmine {

double score_pair(const Box& det, const std::optional<Box>& tracked, const Box& last) noexcept {
  const double with_last = iou(det, last);
  return tracked ? std::max(iou(det, *tracked), with_last) : with_last;
}

MatchMatrix::MatchMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), values_(rows * cols, 0.0), suppressed_(rows * cols, 0) {}

double MatchMatrix::at(std::size_t i, std::size_t j) const {
  const std::size_t k = i * cols_ + j;
  return suppressed_.at(k) ? 0.0 : values_[k];
}

double MatchMatrix::raw(std::size_t i, std::size_t j) const { return values_.at(i * cols_ + j); }

bool MatchMatrix::suppressed(std::size_t i, std::size_t j) const { return suppressed_.at(i * cols_ + j) != 0; }

void MatchMatrix::set(std::size_t i, std::size_t j, double value) { values_.at(i * cols_ + j) = value; }

void MatchMatrix::suppress(std::size_t i, std::size_t j) { suppressed_.at(i * cols_ + j) = 1; }

void MatchMatrix::suppress_row(std::size_t i) {
  for (std::size_t j = 0; j < cols_; ++j) suppress(i, j);
}

void MatchMatrix::suppress_col(std::size_t j) {
  for (std::size_t i = 0; i < rows_; ++i) suppress(i, j);
}

MatchMatrix build_match_matrix(std::span<const Box> dets, std::span<const std::optional<Box>> tracked,
                               std::span<const Box> last) {
  if (tracked.size() != last.size()) throw Error(ErrorCategory::Data, "tracked/last size mismatch");
  MatchMatrix m(dets.size(), last.size());
  for (std::size_t i = 0; i < dets.size(); ++i) {
    for (std::size_t j = 0; j < last.size(); ++j) m.set(i, j, score_pair(dets[i], tracked[j], last[j]));
  }
  return m;
}

const char* to_string(MatchingStrategy strategy) noexcept {
  return strategy == MatchingStrategy::Greedy ? "greedy" : "mutual-best";
}

MatchingStrategy parse_matching_strategy(const std::string& name) {
  if (name == "mutual-best") return MatchingStrategy::MutualBest;
  if (name == "greedy") return MatchingStrategy::Greedy;
  throw ConfigError("unknown matching strategy '" + name + "' (expected mutual-best or greedy)");
}

namespace {

std::size_t row_argmax(const MatchMatrix& m, std::size_t i) {
  std::size_t best = 0;
  for (std::size_t j = 1; j < m.cols(); ++j) {
    if (m.at(i, j) > m.at(i, best)) best = j;
  }
  return best;
}

std::size_t col_argmax(const MatchMatrix& m, std::size_t j) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < m.rows(); ++i) {
    if (m.at(i, j) > m.at(best, j)) best = i;
  }
  return best;
}

MatchResult finish(std::vector<std::optional<std::size_t>> det_to_traj) {
  MatchResult result{std::move(det_to_traj), {}};
  for (std::size_t i = 0; i < result.det_to_traj.size(); ++i) {
    if (!result.det_to_traj[i]) result.unmatched.push_back(i);
  }
  return result;
}

}  // namespace

MatchResult resolve_matches(MatchMatrix m, double theta) {
  std::vector<std::optional<std::size_t>> assigned(m.rows());
  if (m.cols() == 0) return finish(std::move(assigned));

  std::vector<double> row_max(m.rows(), 0.0);
  for (std::size_t i = 0; i < m.rows(); ++i) row_max[i] = m.at(i, row_argmax(m, i));
  std::vector<std::size_t> order(m.rows());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return row_max[a] > row_max[b]; });

  for (const std::size_t i : order) {
    while (true) {
      const std::size_t j = row_argmax(m, i);
      if (!(m.at(i, j) > theta)) break;
      if (col_argmax(m, j) == i) {
        assigned[i] = j;
        m.suppress_row(i);
        m.suppress_col(j);
        break;
      }
      m.suppress(i, j);
    }
  }
  return finish(std::move(assigned));
}

MatchResult resolve_matches_greedy(const MatchMatrix& m, double theta) {
  std::vector<std::optional<std::size_t>> assigned(m.rows());
  for (std::size_t j = 0; j < m.cols(); ++j) {
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < m.rows(); ++i) {
      if (assigned[i] || !(m.at(i, j) > theta)) continue;
      if (!best || m.at(i, j) > m.at(*best, j)) best = i;
    }
    if (best) assigned[*best] = j;
  }
  return finish(std::move(assigned));
}

MatchResult resolve(const MatchMatrix& matrix, double theta, MatchingStrategy strategy) {
  return strategy == MatchingStrategy::Greedy ? resolve_matches_greedy(matrix, theta)
                                              : resolve_matches(matrix, theta);
}

}  // namespace trajmine
