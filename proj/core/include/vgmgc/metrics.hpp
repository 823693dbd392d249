#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vgmgc/nn/matrix.hpp"

namespace vgmgc {

using Labels = std::vector<int>;

/// Count table between two labelings. Label values are compacted to
/// 0..k-1 in increasing order.
struct Contingency {
  std::vector<std::vector<std::size_t>> counts;  ///< [true class][predicted cluster]
  std::vector<std::size_t> row_sums;
  std::vector<std::size_t> col_sums;
  std::size_t n = 0;

  static Contingency build(std::span<const int> truth, std::span<const int> pred);
  std::size_t true_classes() const { return row_sums.size(); }
  std::size_t pred_clusters() const { return col_sums.size(); }
};

/// Minimum-cost assignment on `cost` (rows x cols), padded to square with zeros.
/// Returns, for each row, the matched column or -1 when it matched padding.
std::vector<int> hungarian(const nn::Matrix& cost);

/// Mutual information over the geometric mean of the entropies.
double nmi(std::span<const int> a, std::span<const int> b);
double ari(std::span<const int> a, std::span<const int> b);
/// Best matched fraction over bijections between predicted clusters and classes.
double acc(std::span<const int> truth, std::span<const int> pred);
/// Macro F1 over true classes after the same optimal mapping used by acc().
/// Among count-optimal mappings the one with the highest macro F1 is used.
double f1(std::span<const int> truth, std::span<const int> pred);

struct ClusteringScores {
  double nmi = 0.0;
  double ari = 0.0;
  double acc = 0.0;
  double f1 = 0.0;
};

ClusteringScores evaluate(std::span<const int> truth, std::span<const int> pred);

}  // namespace vgmgc
