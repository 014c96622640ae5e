#pragma once

// Structural metrics used as tree-likeness proxies.
//
// Conventions on disconnected graphs:
//  * path lengths average over ordered pairs that are mutually reachable;
//  * closeness is (r/(N-1)) * (r / sum of distances) over the r reachable
//    nodes, which equals (N-1)/sum for connected graphs and 0 when isolated;
//  * eigenvector centrality lives on the largest component, zeros elsewhere.
// Betweenness counts each unordered pair {s, t} once and divides by (N-1)(N-2).

#include <Eigen/Core>

#include <cstdint>
#include <span>
#include <vector>

#include "hcls/graph.hpp"

namespace hcls {

struct Components {
  std::vector<int> label;  ///< component id per node, ids ordered by smallest member
  std::vector<int> sizes;
  int count() const { return static_cast<int>(sizes.size()); }
};

Components connected_components(const Graph& g);

/// m - N + k.
std::int64_t circuit_rank(const Graph& g);

std::int64_t triangle_count(const Graph& g);

/// 3 * triangles / connected triples; 0 when there are no connected triples.
double global_clustering(const Graph& g);

Eigen::VectorXd betweenness(const Graph& g);
double betweenness_mean(const Graph& g);

Eigen::VectorXd closeness(const Graph& g);
double closeness_mean(const Graph& g);

struct PowerIterationOptions {
  double tolerance = 1e-10;
  int max_iterations = 10000;
};

/// Unit-norm nonnegative leading eigenvector of the largest component's
/// adjacency. Iterates on A + I so bipartite components converge.
Eigen::VectorXd eigenvector_centrality(const Graph& g, const PowerIterationOptions& options = {});
double eigenvector_mean(const Graph& g);

double mean_path_length(const Graph& g);

/// Q = (1/2m) sum_ij [A_ij - k_i k_j / 2m] delta(c_i, c_j); 0 for edgeless graphs.
double modularity(const Graph& g, std::span<const int> communities);

struct CommunityResult {
  double modularity = 0.0;
  std::vector<int> communities;
};

/// Clauset-Newman-Moore agglomeration; returns the best partition on the merge path.
CommunityResult modularity_greedy(const Graph& g);

struct MetricPanel {
  int n = 0;
  int m = 0;
  double edge_density = 0.0;
  std::int64_t circuit_rank = 0;
  std::int64_t triangles = 0;
  int components = 0;
  double clustering = 0.0;
  double mean_betweenness = 0.0;
  double mean_closeness = 0.0;
  double mean_eigenvector = 0.0;
  double mean_path_length = 0.0;
  double modularity = 0.0;
};

MetricPanel metric_panel(const Graph& g);

}  // namespace hcls
