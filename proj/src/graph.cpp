#include "hcls/graph.hpp"

#include <algorithm>
#include <string>

#include "hcls/errors.hpp"

namespace hcls {

Graph::Graph(int n) : n_(n), adj_(static_cast<std::size_t>(n)) {
  if (n < 0) throw DomainError("Graph: negative node count");
}

Graph Graph::from_edges(int n, std::span<const Edge> edges) {
  Graph g(n);
  std::vector<Edge> sorted;
  sorted.reserve(edges.size());
  for (const Edge& e : edges) {
    g.check_node(e.u);
    g.check_node(e.v);
    if (e.u == e.v) throw DataError("Graph: self-loop at node " + std::to_string(e.u));
    sorted.push_back({std::min(e.u, e.v), std::max(e.u, e.v)});
  }
  std::sort(sorted.begin(), sorted.end());
  sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
  for (const Edge& e : sorted) {
    g.adj_[static_cast<std::size_t>(e.u)].push_back(e.v);
    g.adj_[static_cast<std::size_t>(e.v)].push_back(e.u);
  }
  for (auto& nb : g.adj_) std::sort(nb.begin(), nb.end());
  g.edges_ = std::move(sorted);
  return g;
}

void Graph::check_node(int i) const {
  if (i < 0 || i >= n_) throw DataError("Graph: node id " + std::to_string(i) + " out of range");
}

double Graph::density() const {
  if (n_ < 2) return 0.0;
  return static_cast<double>(edges_.size()) / (0.5 * n_ * (n_ - 1.0));
}

bool Graph::add_edge(int i, int j) {
  check_node(i);
  check_node(j);
  if (i == j) throw DataError("Graph: self-loop at node " + std::to_string(i));
  const Edge e{std::min(i, j), std::max(i, j)};
  auto pos = std::lower_bound(edges_.begin(), edges_.end(), e);
  if (pos != edges_.end() && *pos == e) return false;
  edges_.insert(pos, e);
  auto insert_sorted = [](std::vector<int>& v, int x) { v.insert(std::lower_bound(v.begin(), v.end(), x), x); };
  insert_sorted(adj_[static_cast<std::size_t>(i)], j);
  insert_sorted(adj_[static_cast<std::size_t>(j)], i);
  return true;
}

bool Graph::has_edge(int i, int j) const {
  if (i < 0 || j < 0 || i >= n_ || j >= n_ || i == j) return false;
  const auto& nb = neighbors(i);
  return std::binary_search(nb.begin(), nb.end(), j);
}

Eigen::VectorXd Graph::degrees() const {
  Eigen::VectorXd k(n_);
  for (int i = 0; i < n_; ++i) k(i) = degree(i);
  return k;
}

Eigen::SparseMatrix<double> Graph::adjacency() const {
  std::vector<Eigen::Triplet<double>> triplets;
  triplets.reserve(2 * edges_.size());
  for (const Edge& e : edges_) {
    triplets.emplace_back(e.u, e.v, 1.0);
    triplets.emplace_back(e.v, e.u, 1.0);
  }
  Eigen::SparseMatrix<double> a(n_, n_);
  a.setFromTriplets(triplets.begin(), triplets.end());
  return a;
}

Eigen::MatrixXd Graph::dense_adjacency() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n_, n_);
  for (const Edge& e : edges_) {
    a(e.u, e.v) = 1.0;
    a(e.v, e.u) = 1.0;
  }
  return a;
}

Graph Graph::permuted(std::span<const int> perm) const {
  if (static_cast<int>(perm.size()) != n_) throw ConfigError("Graph::permuted: permutation size mismatch");
  std::vector<Edge> relabeled;
  relabeled.reserve(edges_.size());
  for (const Edge& e : edges_) {
    relabeled.push_back({perm[static_cast<std::size_t>(e.u)], perm[static_cast<std::size_t>(e.v)]});
  }
  return from_edges(n_, relabeled);
}

}  // namespace hcls
