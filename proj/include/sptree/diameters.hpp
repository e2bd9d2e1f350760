#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "sptree/errors.hpp"
#include "sptree/linalg.hpp"
#include "sptree/matrix.hpp"

namespace sptree {

// A view of one cell: member rows of a shared point matrix plus the cell's
// weight within the partition it belongs to (fraction of the parent's
// points). The matrix must outlive the view.
struct CellView {
  const Matrix* points = nullptr;
  std::span<const index_t> members;
  double weight = 1.0;

  std::size_t size() const { return members.size(); }
};

struct DiameterStats {
  double max_diam_sq = 0.0;  // max squared interpoint distance
  double avg_diam_sq = 0.0;  // mean squared distance over ordered pairs
  std::size_t count = 0;
  bool max_exact = true;  // false when max_diam_sq is the 4*max||x-mean||^2 bound
};

// Cells larger than this use an O(mD) upper bound for the max diameter
// instead of the exact O(m^2 D) pair scan.
inline constexpr std::size_t kMaxDiamExactCutoff = 4096;

// Max squared interpoint distance. Exact for cells up to `exact_cutoff`
// points; beyond that returns 4*max||x - mean||^2, an upper bound by the
// triangle inequality, with .max_exact = false in callers that keep stats.
inline double max_diam_sq(const CellView& cell,
                          std::size_t exact_cutoff = kMaxDiamExactCutoff,
                          bool* exact = nullptr) {
  if (cell.size() == 0) throw EmptyCell("max_diam_sq of empty cell");
  const Matrix& X = *cell.points;
  const auto& idx = cell.members;
  if (cell.size() <= exact_cutoff) {
    if (exact) *exact = true;
    double best = 0.0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
      auto xi = X.row(idx[i]);
      for (std::size_t j = i + 1; j < idx.size(); ++j)
        best = std::max(best, squared_distance(xi, X.row(idx[j])));
    }
    return best;
  }
  if (exact) *exact = false;
  const auto mu = mean(X, idx);
  double far = 0.0;
  for (index_t r : idx) far = std::max(far, squared_distance(X.row(r), mu));
  return 4.0 * far;
}

// Average squared interpoint distance over ordered pairs:
// (1/m^2) sum_{x,x'} ||x - x'||^2 == 2 * trace(cov), computed in O(mD).
inline double avg_diam_sq(const CellView& cell) {
  if (cell.size() == 0) throw EmptyCell("avg_diam_sq of empty cell");
  return 2.0 * scatter_trace(*cell.points, cell.members);
}

inline DiameterStats diameter_stats(const CellView& cell,
                                    std::size_t exact_cutoff = kMaxDiamExactCutoff) {
  DiameterStats s;
  s.count = cell.size();
  s.avg_diam_sq = avg_diam_sq(cell);
  s.max_diam_sq = max_diam_sq(cell, exact_cutoff, &s.max_exact);
  return s;
}

// Weighted averages of per-cell max/avg squared diameters over a partition.
// Weights must sum to 1 within 1e-12.
inline std::pair<double, double> partition_stats(
    std::span<const CellView> cells,
    std::size_t exact_cutoff = kMaxDiamExactCutoff) {
  if (cells.empty()) throw InvalidPartition("partition has no cells");
  double wsum = 0.0;
  for (const auto& c : cells) wsum += c.weight;
  if (std::abs(wsum - 1.0) > 1e-12)
    throw InvalidPartition("cell weights do not sum to 1");
  double mx = 0.0, avg = 0.0;
  for (const auto& c : cells) {
    mx += c.weight * max_diam_sq(c, exact_cutoff);
    avg += c.weight * avg_diam_sq(c);
  }
  return {mx, avg};
}

namespace detail {

inline bool is_bipartition(std::span<const index_t> parent,
                           std::span<const index_t> left,
                           std::span<const index_t> right) {
  if (left.empty() || right.empty()) return false;
  if (left.size() + right.size() != parent.size()) return false;
  std::vector<index_t> merged(left.begin(), left.end());
  merged.insert(merged.end(), right.begin(), right.end());
  std::sort(merged.begin(), merged.end());
  std::vector<index_t> p(parent.begin(), parent.end());
  std::sort(p.begin(), p.end());
  return merged == p;
}

// 2 * mu1 * mu2 * ||mean1 - mean2||^2 with weights relative to the parent.
// No validation; used on splits that are bipartitions by construction.
inline double split_decrease_unchecked(const Matrix& X,
                                       std::span<const index_t> left,
                                       std::span<const index_t> right) {
  const double m = static_cast<double>(left.size() + right.size());
  const double w1 = static_cast<double>(left.size()) / m;
  const double w2 = static_cast<double>(right.size()) / m;
  const auto m1 = mean(X, left);
  const auto m2 = mean(X, right);
  return 2.0 * w1 * w2 * squared_distance(m1, m2);
}

}  // namespace detail

// Exact decrease of avg_diam_sq caused by splitting A into {A1, A2}:
// equals avg_diam_sq(A) minus the weighted child average.
inline double split_decrease(const CellView& parent, const CellView& left,
                             const CellView& right) {
  if (!detail::is_bipartition(parent.members, left.members, right.members))
    throw InvalidPartition("children do not bipartition the parent cell");
  return detail::split_decrease_unchecked(*parent.points, left.members,
                                          right.members);
}

}  // namespace sptree
