#pragma once

#include <cstddef>

#include "vgmgc/nn/matrix.hpp"

namespace vgmgc {

using nn::Index;
using nn::Matrix;

/// Dense binary adjacency over n nodes. Entries are exactly 0.0 or 1.0.
class Graph {
 public:
  Graph() = default;
  explicit Graph(Index n) : adj_(Matrix::Zero(n, n)) {}
  /// Throws ShapeError for non-square input, InvalidArgument for non-binary entries.
  static Graph from_adjacency(Matrix adj);

  Index n() const { return adj_.rows(); }
  bool edge(Index i, Index j) const { return adj_(i, j) != 0.0; }
  void set_edge(Index i, Index j, bool present = true) { adj_(i, j) = present ? 1.0 : 0.0; }
  const Matrix& adjacency() const { return adj_; }
  std::size_t edge_count() const;
  bool symmetric() const { return adj_ == adj_.transpose(); }

  friend bool operator==(const Graph& a, const Graph& b) { return a.adj_ == b.adj_; }

 private:
  Matrix adj_;
};

/// Row-stochastic weights derived from a graph or a relaxed weight matrix.
struct NormalizedGraph {
  Matrix values;
  /// Rows that summed to zero and were left as zero.
  std::size_t zero_rows = 0;

  Index n() const { return values.rows(); }
};

enum class KnnMetric { cosine, euclidean };

Graph add_self_loops(const Graph& g);

/// D^-1 A. Rows of an all-zero source stay zero and are counted in `zero_rows`.
NormalizedGraph row_normalize(const Graph& g);
/// Same for nonnegative relaxed weights; throws InvalidArgument on negative entries.
NormalizedGraph row_normalize(const Matrix& weights);

/// Number of entries where the adjacencies differ.
std::size_t hamming_distance(const Graph& a, const Graph& b);

/// k-nearest-neighbour graph over the rows of `x`, union-symmetrized, with self-loops.
/// Ties are broken towards the lower node index. Requires 0 < k < n.
Graph knn_graph(const Matrix& x, int k, KnnMetric metric = KnnMetric::cosine);

}  // namespace vgmgc
