#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vgmgc/metrics.hpp"
#include "vgmgc/nn/tape.hpp"

namespace vgmgc {

using nn::Index;
using nn::Matrix;
using nn::Var;

/// Per-view trust weights. After every update max(b) == 1.
struct Beliefs {
  std::vector<double> b;
  double rho = 1.0;

  static Beliefs unit(std::size_t views, double rho) { return {std::vector<double>(views, 1.0), rho}; }
};

/// Lower bound applied to updated beliefs so they stay inside (0, 1].
inline constexpr double min_belief = 1e-6;

/// Concat(b_1 Z^1, ..., b_V Z^V) along the feature axis.
Matrix fuse(std::span<const Matrix> embeddings, std::span<const double> beliefs);
Var fuse(std::span<const Var> embeddings, std::span<const double> beliefs);

struct KMeansOptions {
  int restarts = 10;
  int max_iter = 300;
  /// Stop when the relative inertia decrease falls to this value or below.
  double tol = 1e-6;
};

struct ClusterResult {
  Labels labels;
  Matrix centroids;
  double inertia = 0.0;
  /// Inertia after each assignment step of the winning restart.
  std::vector<double> inertia_history;
};

/// Lloyd iterations from k-means++ seeds; the lowest-inertia restart wins
/// (earliest on ties). Deterministic for a given seed.
ClusterResult kmeans(const Matrix& z, int c, std::uint64_t seed, const KMeansOptions& options = {});

using ScoreFn = std::function<double(std::span<const int>, std::span<const int>)>;

/// b_v = (score_v / max_w score_w)^rho, floored at min_belief. All-zero scores give unit beliefs.
std::vector<double> beliefs_from_scores(std::span<const double> scores, double rho);

/// Scores each view's labels against the pseudo-labels (NMI unless another score is given).
Beliefs update_beliefs(std::span<const int> pseudo_labels, std::span<const Labels> view_labels, double rho,
                       const ScoreFn& score = nullptr);

/// Student's t soft assignment, one degree of freedom. Rows sum to one.
Matrix soft_assignment(const Matrix& z, const Matrix& centroids);
Var soft_assignment(Var z, const Matrix& centroids);

/// p_ij = (q_ij^2 / f_j) / sum_k (q_ik^2 / f_k), f_j = sum_i q_ij.
Matrix target_distribution(const Matrix& q);

/// sum_v KL(P || Q^v) + KL(P || Q_global); P is a constant target.
Var clustering_loss(const Matrix& p_global, std::span<const Var> q_views, Var q_global);

}  // namespace vgmgc
