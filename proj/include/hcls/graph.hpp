#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstddef>
#include <span>
#include <vector>

namespace hcls {

/// Unordered node pair stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;

  friend auto operator<=>(const Edge&, const Edge&) = default;
};

/// Undirected simple graph on nodes 0..n-1. The sorted edge list and the
/// sorted neighbor lists are kept consistent by every mutator.
class Graph {
 public:
  Graph() = default;
  explicit Graph(int n);

  /// Builds from a pair list; duplicates collapse, self-loops and
  /// out-of-range endpoints throw DataError.
  static Graph from_edges(int n, std::span<const Edge> edges);

  int num_nodes() const { return n_; }
  int num_edges() const { return static_cast<int>(edges_.size()); }
  double density() const;

  /// Inserts {i, j}; returns false when already present.
  bool add_edge(int i, int j);
  bool has_edge(int i, int j) const;

  const std::vector<Edge>& edges() const { return edges_; }
  const std::vector<int>& neighbors(int i) const { return adj_[static_cast<std::size_t>(i)]; }
  int degree(int i) const { return static_cast<int>(neighbors(i).size()); }
  Eigen::VectorXd degrees() const;

  /// Symmetric 0/1 adjacency with empty diagonal.
  Eigen::SparseMatrix<double> adjacency() const;
  Eigen::MatrixXd dense_adjacency() const;

  /// Relabels node i as perm[i].
  Graph permuted(std::span<const int> perm) const;

  friend bool operator==(const Graph& a, const Graph& b) { return a.n_ == b.n_ && a.edges_ == b.edges_; }

 private:
  void check_node(int i) const;

  int n_ = 0;
  std::vector<Edge> edges_;
  std::vector<std::vector<int>> adj_;
};

}  // namespace hcls
