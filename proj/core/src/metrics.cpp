#include "vgmgc/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "vgmgc/error.hpp"

namespace vgmgc {

namespace {

void check_pair(std::span<const int> a, std::span<const int> b, const char* what) {
  if (a.empty()) throw InvalidArgument(std::string(what) + ": empty labeling");
  if (a.size() != b.size()) {
    throw InvalidArgument(std::string(what) + ": labelings differ in length (" + std::to_string(a.size()) + " vs " +
                          std::to_string(b.size()) + ")");
  }
}

std::vector<int> compact(std::span<const int> labels, std::size_t& k) {
  std::map<int, int> ids;
  for (int l : labels) ids.emplace(l, 0);
  int next = 0;
  for (auto& [label, id] : ids) id = next++;
  k = ids.size();
  std::vector<int> out;
  out.reserve(labels.size());
  for (int l : labels) out.push_back(ids[l]);
  return out;
}

double entropy(const std::vector<std::size_t>& sums, double n) {
  double h = 0.0;
  for (std::size_t s : sums) {
    if (s > 0) {
      const double p = static_cast<double>(s) / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

double comb2(std::size_t x) { return x < 2 ? 0.0 : static_cast<double>(x) * static_cast<double>(x - 1) / 2.0; }

/// Optimal predicted-cluster -> true-class mapping (-1 = unmatched).
std::vector<int> best_mapping(const Contingency& c) {
  const std::size_t kt = c.true_classes(), kp = c.pred_clusters();
  // Matched count first; ties go to the higher summed per-pair F1, which
  // stays below 1 in total, so label names never change the result.
  const double tie_weight = 1.0 / static_cast<double>(std::max(kt, kp) + 1);
  nn::Matrix cost = nn::Matrix::Zero(static_cast<nn::Index>(kp), static_cast<nn::Index>(kt));
  for (std::size_t t = 0; t < kt; ++t) {
    for (std::size_t p = 0; p < kp; ++p) {
      const double n = static_cast<double>(c.counts[t][p]);
      const double pair_f1 = 2.0 * n / static_cast<double>(c.row_sums[t] + c.col_sums[p]);
      cost(static_cast<nn::Index>(p), static_cast<nn::Index>(t)) = -(n + tie_weight * pair_f1);
    }
  }
  return hungarian(cost);
}

}  // namespace

Contingency Contingency::build(std::span<const int> truth, std::span<const int> pred) {
  check_pair(truth, pred, "Contingency");
  std::size_t kt = 0, kp = 0;
  const std::vector<int> t = compact(truth, kt);
  const std::vector<int> p = compact(pred, kp);
  Contingency c;
  c.counts.assign(kt, std::vector<std::size_t>(kp, 0));
  c.row_sums.assign(kt, 0);
  c.col_sums.assign(kp, 0);
  c.n = truth.size();
  for (std::size_t i = 0; i < t.size(); ++i) {
    ++c.counts[static_cast<std::size_t>(t[i])][static_cast<std::size_t>(p[i])];
    ++c.row_sums[static_cast<std::size_t>(t[i])];
    ++c.col_sums[static_cast<std::size_t>(p[i])];
  }
  return c;
}

std::vector<int> hungarian(const nn::Matrix& cost) {
  const std::size_t rows = static_cast<std::size_t>(cost.rows());
  const std::size_t cols = static_cast<std::size_t>(cost.cols());
  const std::size_t n = std::max(rows, cols);
  if (n == 0) return {};
  auto at = [&](std::size_t i, std::size_t j) {
    return (i < rows && j < cols) ? cost(static_cast<nn::Index>(i), static_cast<nn::Index>(j)) : 0.0;
  };
  if (!cost.allFinite()) throw InvalidArgument("hungarian: non-finite cost");

  // Shortest augmenting path with row/column potentials, 1-based with a
  // virtual column 0.
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match_col(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match_col[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match_col[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match_col[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match_col[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match_col[j0] = match_col[j1];
      j0 = j1;
    } while (j0 != 0);
  }

  std::vector<int> assignment(rows, -1);
  for (std::size_t j = 1; j <= n; ++j) {
    const std::size_t i = match_col[j];
    if (i >= 1 && i <= rows && j <= cols) assignment[i - 1] = static_cast<int>(j - 1);
  }
  return assignment;
}

double nmi(std::span<const int> a, std::span<const int> b) {
  const Contingency c = Contingency::build(a, b);
  const double n = static_cast<double>(c.n);
  const double ha = entropy(c.row_sums, n);
  const double hb = entropy(c.col_sums, n);
  if (ha == 0.0 && hb == 0.0) return 1.0;
  if (ha == 0.0 || hb == 0.0) return 0.0;
  double mi = 0.0;
  for (std::size_t i = 0; i < c.true_classes(); ++i) {
    for (std::size_t j = 0; j < c.pred_clusters(); ++j) {
      const std::size_t nij = c.counts[i][j];
      if (nij == 0) continue;
      const double pij = static_cast<double>(nij) / n;
      mi += pij * std::log(static_cast<double>(nij) * n /
                           (static_cast<double>(c.row_sums[i]) * static_cast<double>(c.col_sums[j])));
    }
  }
  return std::clamp(mi / std::sqrt(ha * hb), 0.0, 1.0);
}

double ari(std::span<const int> a, std::span<const int> b) {
  const Contingency c = Contingency::build(a, b);
  double index = 0.0;
  for (const auto& row : c.counts) {
    for (std::size_t nij : row) index += comb2(nij);
  }
  double sum_a = 0.0, sum_b = 0.0;
  for (std::size_t s : c.row_sums) sum_a += comb2(s);
  for (std::size_t s : c.col_sums) sum_b += comb2(s);
  const double total = comb2(c.n);
  const double expected = total > 0.0 ? sum_a * sum_b / total : 0.0;
  const double max_index = 0.5 * (sum_a + sum_b);
  const double denom = max_index - expected;
  if (denom == 0.0) return 1.0;
  return (index - expected) / denom;
}

double acc(std::span<const int> truth, std::span<const int> pred) {
  const Contingency c = Contingency::build(truth, pred);
  const std::vector<int> mapping = best_mapping(c);
  std::size_t matched = 0;
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    if (mapping[p] >= 0) matched += c.counts[static_cast<std::size_t>(mapping[p])][p];
  }
  return static_cast<double>(matched) / static_cast<double>(c.n);
}

double f1(std::span<const int> truth, std::span<const int> pred) {
  const Contingency c = Contingency::build(truth, pred);
  const std::vector<int> mapping = best_mapping(c);
  std::vector<int> cluster_of_class(c.true_classes(), -1);
  for (std::size_t p = 0; p < mapping.size(); ++p) {
    if (mapping[p] >= 0) cluster_of_class[static_cast<std::size_t>(mapping[p])] = static_cast<int>(p);
  }
  double total = 0.0;
  for (std::size_t t = 0; t < c.true_classes(); ++t) {
    const int p = cluster_of_class[t];
    if (p < 0) continue;
    const double tp = static_cast<double>(c.counts[t][static_cast<std::size_t>(p)]);
    if (tp == 0.0) continue;
    const double precision = tp / static_cast<double>(c.col_sums[static_cast<std::size_t>(p)]);
    const double recall = tp / static_cast<double>(c.row_sums[t]);
    total += 2.0 * precision * recall / (precision + recall);
  }
  return total / static_cast<double>(c.true_classes());
}

ClusteringScores evaluate(std::span<const int> truth, std::span<const int> pred) {
  return {nmi(truth, pred), ari(truth, pred), acc(truth, pred), f1(truth, pred)};
}

}  // namespace vgmgc
