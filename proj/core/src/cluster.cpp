#include "vgmgc/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "vgmgc/error.hpp"
#include "vgmgc/nn/rng.hpp"

namespace vgmgc {

Matrix fuse(std::span<const Matrix> embeddings, std::span<const double> beliefs) {
  if (embeddings.empty()) throw InvalidArgument("fuse: no embeddings");
  if (embeddings.size() != beliefs.size()) throw InvalidArgument("fuse: one belief per view required");
  const Index n = embeddings.front().rows();
  Index width = 0;
  for (const Matrix& z : embeddings) {
    if (z.rows() != n) throw ShapeError("fuse: embeddings differ in node count");
    width += z.cols();
  }
  Matrix out(n, width);
  Index offset = 0;
  for (std::size_t v = 0; v < embeddings.size(); ++v) {
    out.middleCols(offset, embeddings[v].cols()) = beliefs[v] * embeddings[v];
    offset += embeddings[v].cols();
  }
  return out;
}

Var fuse(std::span<const Var> embeddings, std::span<const double> beliefs) {
  if (embeddings.empty()) throw InvalidArgument("fuse: no embeddings");
  if (embeddings.size() != beliefs.size()) throw InvalidArgument("fuse: one belief per view required");
  std::vector<Var> scaled;
  scaled.reserve(embeddings.size());
  for (std::size_t v = 0; v < embeddings.size(); ++v) scaled.push_back(nn::scale(embeddings[v], beliefs[v]));
  return nn::concat_cols(scaled);
}

namespace {

struct Run {
  Labels labels;
  Matrix centroids;
  double inertia = 0.0;
  std::vector<double> history;
};

Matrix kmeanspp_seeds(const Matrix& z, int c, nn::Rng& rng) {
  const Index n = z.rows();
  Matrix centers(c, z.cols());
  std::vector<double> mind(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  std::vector<bool> chosen(static_cast<std::size_t>(n), false);
  Index pick = static_cast<Index>(nn::uniform_index(rng, static_cast<std::uint64_t>(n)));
  for (int k = 0; k < c; ++k) {
    if (k > 0) {
      double total = 0.0;
      for (double d : mind) total += d;
      if (total > 0.0) {
        double r = nn::uniform(rng, 0.0, total);
        pick = -1;
        for (Index i = 0; i < n; ++i) {
          const double d = mind[static_cast<std::size_t>(i)];
          if (d <= 0.0) continue;
          pick = i;
          if (r < d) break;
          r -= d;
        }
      } else {
        // Every remaining point coincides with a seed; take the first unused one.
        pick = 0;
        while (pick < n - 1 && chosen[static_cast<std::size_t>(pick)]) ++pick;
      }
    }
    chosen[static_cast<std::size_t>(pick)] = true;
    centers.row(k) = z.row(pick);
    for (Index i = 0; i < n; ++i) {
      const double d = (z.row(i) - centers.row(k)).squaredNorm();
      mind[static_cast<std::size_t>(i)] = std::min(mind[static_cast<std::size_t>(i)], d);
    }
  }
  return centers;
}

void assign(const Matrix& z, const Eigen::VectorXd& sq_norms, const Matrix& centers, Labels& labels) {
  const Matrix cross = z * centers.transpose();
  const Eigen::VectorXd csq = centers.rowwise().squaredNorm();
  for (Index i = 0; i < z.rows(); ++i) {
    int best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Index k = 0; k < centers.rows(); ++k) {
      const double d = sq_norms(i) - 2.0 * cross(i, k) + csq(k);
      if (d < best_d) {
        best_d = d;
        best = static_cast<int>(k);
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
  }
}

double inertia_of(const Matrix& z, const Matrix& centers, const Labels& labels) {
  double total = 0.0;
  for (Index i = 0; i < z.rows(); ++i) total += (z.row(i) - centers.row(labels[static_cast<std::size_t>(i)])).squaredNorm();
  return total;
}

Run lloyd(const Matrix& z, int c, nn::Rng& rng, const KMeansOptions& opt) {
  const Index n = z.rows();
  const Eigen::VectorXd sq_norms = z.rowwise().squaredNorm();
  Run run;
  run.centroids = kmeanspp_seeds(z, c, rng);
  run.labels.assign(static_cast<std::size_t>(n), 0);
  for (int iter = 0; iter < opt.max_iter; ++iter) {
    assign(z, sq_norms, run.centroids, run.labels);
    const double inertia = inertia_of(z, run.centroids, run.labels);
    run.history.push_back(inertia);
    run.inertia = inertia;
    if (iter > 0) {
      const double prev = run.history[run.history.size() - 2];
      if (prev - inertia <= opt.tol * prev) break;
    }
    if (iter + 1 == opt.max_iter) break;

    Matrix sums = Matrix::Zero(c, z.cols());
    std::vector<Index> counts(static_cast<std::size_t>(c), 0);
    for (Index i = 0; i < n; ++i) {
      const int k = run.labels[static_cast<std::size_t>(i)];
      sums.row(k) += z.row(i);
      ++counts[static_cast<std::size_t>(k)];
    }
    std::vector<bool> taken(static_cast<std::size_t>(n), false);
    for (int k = 0; k < c; ++k) {
      if (counts[static_cast<std::size_t>(k)] > 0) {
        run.centroids.row(k) = sums.row(k) / static_cast<double>(counts[static_cast<std::size_t>(k)]);
        continue;
      }
      // Empty cluster: move it onto the point farthest from its current centroid.
      Index far = 0;
      double far_d = -1.0;
      for (Index i = 0; i < n; ++i) {
        if (taken[static_cast<std::size_t>(i)]) continue;
        const double d = (z.row(i) - run.centroids.row(run.labels[static_cast<std::size_t>(i)])).squaredNorm();
        if (d > far_d) {
          far_d = d;
          far = i;
        }
      }
      taken[static_cast<std::size_t>(far)] = true;
      run.centroids.row(k) = z.row(far);
    }
  }
  return run;
}

}  // namespace

ClusterResult kmeans(const Matrix& z, int c, std::uint64_t seed, const KMeansOptions& options) {
  if (c <= 0) throw InvalidArgument("kmeans: cluster count must be positive");
  if (c > z.rows()) {
    throw InvalidArgument("kmeans: " + std::to_string(c) + " clusters requested for " + std::to_string(z.rows()) +
                          " points");
  }
  if (options.restarts < 1 || options.max_iter < 1) throw InvalidArgument("kmeans: restarts and max_iter must be >= 1");
  Run best;
  bool have = false;
  for (int r = 0; r < options.restarts; ++r) {
    nn::Rng rng = nn::make_stream(nn::mix_seed(seed, static_cast<std::uint64_t>(r)), 0, nn::Stream::kmeans);
    Run run = lloyd(z, c, rng, options);
    if (!have || run.inertia < best.inertia) {
      best = std::move(run);
      have = true;
    }
  }
  return {std::move(best.labels), std::move(best.centroids), best.inertia, std::move(best.history)};
}

std::vector<double> beliefs_from_scores(std::span<const double> scores, double rho) {
  if (rho < 0.0) throw InvalidArgument("beliefs_from_scores: rho must be nonnegative");
  double top = 0.0;
  for (double s : scores) top = std::max(top, s);
  std::vector<double> b(scores.size(), 1.0);
  if (top <= 0.0) return b;
  for (std::size_t v = 0; v < scores.size(); ++v) {
    b[v] = std::max(min_belief, std::pow(std::max(scores[v], 0.0) / top, rho));
  }
  return b;
}

Beliefs update_beliefs(std::span<const int> pseudo_labels, std::span<const Labels> view_labels, double rho,
                       const ScoreFn& score) {
  std::vector<double> scores;
  scores.reserve(view_labels.size());
  for (const Labels& labels : view_labels) {
    scores.push_back(score ? score(pseudo_labels, labels) : nmi(pseudo_labels, labels));
  }
  return {beliefs_from_scores(scores, rho), rho};
}

Matrix soft_assignment(const Matrix& z, const Matrix& centroids) {
  if (z.cols() != centroids.cols()) throw ShapeError("soft_assignment: width mismatch");
  Matrix q(z.rows(), centroids.rows());
  for (Index i = 0; i < z.rows(); ++i) {
    for (Index j = 0; j < centroids.rows(); ++j) q(i, j) = 1.0 / (1.0 + (z.row(i) - centroids.row(j)).squaredNorm());
    q.row(i) /= q.row(i).sum();
  }
  return q;
}

Var soft_assignment(Var z, const Matrix& centroids) { return nn::student_t_assignment(z, centroids); }

Matrix target_distribution(const Matrix& q) {
  const Eigen::RowVectorXd freq = q.colwise().sum();
  Matrix p(q.rows(), q.cols());
  for (Index i = 0; i < q.rows(); ++i) {
    for (Index j = 0; j < q.cols(); ++j) p(i, j) = q(i, j) * q(i, j) / freq(j);
    p.row(i) /= p.row(i).sum();
  }
  return p;
}

Var clustering_loss(const Matrix& p_global, std::span<const Var> q_views, Var q_global) {
  Var total = nn::kl_divergence_sum(p_global, q_global);
  for (const Var& q : q_views) total = nn::add(total, nn::kl_divergence_sum(p_global, q));
  return total;
}

}  // namespace vgmgc
