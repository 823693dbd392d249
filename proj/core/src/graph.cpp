#include "vgmgc/graph.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

namespace vgmgc {

Graph Graph::from_adjacency(Matrix adj) {
  if (adj.rows() != adj.cols()) {
    throw ShapeError("Graph: adjacency must be square, got " + std::to_string(adj.rows()) + "x" +
                     std::to_string(adj.cols()));
  }
  for (Index i = 0; i < adj.size(); ++i) {
    const double v = adj.data()[i];
    if (v != 0.0 && v != 1.0) throw InvalidArgument("Graph: adjacency entries must be 0 or 1");
  }
  Graph g;
  g.adj_ = std::move(adj);
  return g;
}

std::size_t Graph::edge_count() const { return static_cast<std::size_t>(adj_.sum()); }

Graph add_self_loops(const Graph& g) {
  Graph out = g;
  for (Index i = 0; i < g.n(); ++i) out.set_edge(i, i);
  return out;
}

NormalizedGraph row_normalize(const Matrix& weights) {
  if (weights.rows() != weights.cols()) throw ShapeError("row_normalize: weights must be square");
  if ((weights.array() < 0.0).any()) throw InvalidArgument("row_normalize: negative weight");
  NormalizedGraph out{Matrix::Zero(weights.rows(), weights.cols()), 0};
  for (Index i = 0; i < weights.rows(); ++i) {
    const double s = weights.row(i).sum();
    if (s > 0.0) {
      out.values.row(i) = weights.row(i) / s;
    } else {
      ++out.zero_rows;
    }
  }
  return out;
}

NormalizedGraph row_normalize(const Graph& g) { return row_normalize(g.adjacency()); }

std::size_t hamming_distance(const Graph& a, const Graph& b) {
  if (a.n() != b.n()) {
    throw ShapeError("hamming_distance: " + std::to_string(a.n()) + " vs " + std::to_string(b.n()) + " nodes");
  }
  return static_cast<std::size_t>((a.adjacency() - b.adjacency()).cwiseAbs().sum());
}

Graph knn_graph(const Matrix& x, int k, KnnMetric metric) {
  const Index n = x.rows();
  if (k <= 0) throw InvalidArgument("knn_graph: k must be positive");
  if (k >= n) throw InvalidArgument("knn_graph: k must be smaller than the node count");

  // Smaller score = closer.
  Matrix score(n, n);
  if (metric == KnnMetric::cosine) {
    Eigen::VectorXd norms = x.rowwise().norm();
    Matrix gram = x * x.transpose();
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        const double denom = norms(i) * norms(j);
        // Zero rows have undefined direction; treat them as orthogonal to everything.
        const double cos = denom > 0.0 ? gram(i, j) / denom : 0.0;
        score(i, j) = 1.0 - cos;
      }
    }
    // Identical rows must be exact ties at distance zero.
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) {
        if (norms(i) > 0.0 && x.row(i) == x.row(j)) score(i, j) = 0.0;
      }
    }
  } else {
    for (Index i = 0; i < n; ++i) {
      for (Index j = 0; j < n; ++j) score(i, j) = (x.row(i) - x.row(j)).squaredNorm();
    }
  }

  Graph g(n);
  std::vector<Index> order(static_cast<std::size_t>(n - 1));
  for (Index i = 0; i < n; ++i) {
    order.clear();
    for (Index j = 0; j < n; ++j) {
      if (j != i) order.push_back(j);
    }
    std::stable_sort(order.begin(), order.end(), [&](Index a, Index b) { return score(i, a) < score(i, b); });
    for (int r = 0; r < k; ++r) {
      g.set_edge(i, order[static_cast<std::size_t>(r)]);
      g.set_edge(order[static_cast<std::size_t>(r)], i);
    }
  }
  return add_self_loops(g);
}

}  // namespace vgmgc
