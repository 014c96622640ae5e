#include "hcls/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <tuple>

#include "hcls/errors.hpp"

namespace hcls {
namespace {

// One BFS per source: Brandes dependencies plus distance sums.
struct ShortestPathStats {
  Eigen::VectorXd pair_dependency;  // sum over ordered (s, t) of sigma_st(i) / sigma_st
  std::vector<std::int64_t> distance_sum;
  std::vector<int> reachable;
};

ShortestPathStats shortest_path_stats(const Graph& g) {
  const int n = g.num_nodes();
  ShortestPathStats stats;
  stats.pair_dependency = Eigen::VectorXd::Zero(n);
  stats.distance_sum.assign(static_cast<std::size_t>(n), 0);
  stats.reachable.assign(static_cast<std::size_t>(n), 0);

  std::vector<int> dist(static_cast<std::size_t>(n));
  std::vector<double> sigma(static_cast<std::size_t>(n));
  std::vector<double> delta(static_cast<std::size_t>(n));
  std::vector<int> order;
  order.reserve(static_cast<std::size_t>(n));
  std::vector<int> queue(static_cast<std::size_t>(n));

  for (int s = 0; s < n; ++s) {
    std::fill(dist.begin(), dist.end(), -1);
    std::fill(sigma.begin(), sigma.end(), 0.0);
    std::fill(delta.begin(), delta.end(), 0.0);
    order.clear();
    dist[static_cast<std::size_t>(s)] = 0;
    sigma[static_cast<std::size_t>(s)] = 1.0;
    std::size_t head = 0, tail = 0;
    queue[tail++] = s;
    while (head < tail) {
      const int v = queue[head++];
      order.push_back(v);
      const auto dv = dist[static_cast<std::size_t>(v)];
      for (int w : g.neighbors(v)) {
        auto& dw = dist[static_cast<std::size_t>(w)];
        if (dw < 0) {
          dw = dv + 1;
          queue[tail++] = w;
        }
        if (dw == dv + 1) sigma[static_cast<std::size_t>(w)] += sigma[static_cast<std::size_t>(v)];
      }
    }
    std::int64_t total = 0;
    for (int v : order) total += dist[static_cast<std::size_t>(v)];
    stats.distance_sum[static_cast<std::size_t>(s)] = total;
    stats.reachable[static_cast<std::size_t>(s)] = static_cast<int>(order.size()) - 1;

    for (auto it = order.rbegin(); it != order.rend(); ++it) {
      const int w = *it;
      const auto uw = static_cast<std::size_t>(w);
      for (int v : g.neighbors(w)) {
        const auto uv = static_cast<std::size_t>(v);
        if (dist[uv] == dist[uw] - 1) delta[uv] += sigma[uv] / sigma[uw] * (1.0 + delta[uw]);
      }
      if (w != s) stats.pair_dependency(w) += delta[uw];
    }
  }
  return stats;
}

Eigen::VectorXd betweenness_from(const ShortestPathStats& stats, int n) {
  if (n < 3) return Eigen::VectorXd::Zero(n);
  // Ordered accumulation visits each unordered pair twice.
  return stats.pair_dependency / (2.0 * (n - 1.0) * (n - 2.0));
}

Eigen::VectorXd closeness_from(const ShortestPathStats& stats, int n) {
  Eigen::VectorXd c = Eigen::VectorXd::Zero(n);
  if (n < 2) return c;
  for (int i = 0; i < n; ++i) {
    const double r = stats.reachable[static_cast<std::size_t>(i)];
    const double total = static_cast<double>(stats.distance_sum[static_cast<std::size_t>(i)]);
    if (r > 0) c(i) = (r / (n - 1.0)) * (r / total);
  }
  return c;
}

double path_length_from(const ShortestPathStats& stats) {
  double total = 0.0;
  double pairs = 0.0;
  for (std::size_t i = 0; i < stats.reachable.size(); ++i) {
    total += static_cast<double>(stats.distance_sum[i]);
    pairs += stats.reachable[i];
  }
  return pairs > 0 ? total / pairs : 0.0;
}

}  // namespace

Components connected_components(const Graph& g) {
  const int n = g.num_nodes();
  Components out;
  out.label.assign(static_cast<std::size_t>(n), -1);
  std::vector<int> stack;
  for (int s = 0; s < n; ++s) {
    if (out.label[static_cast<std::size_t>(s)] >= 0) continue;
    const int id = out.count();
    int size = 0;
    stack.push_back(s);
    out.label[static_cast<std::size_t>(s)] = id;
    while (!stack.empty()) {
      const int v = stack.back();
      stack.pop_back();
      ++size;
      for (int w : g.neighbors(v)) {
        if (out.label[static_cast<std::size_t>(w)] < 0) {
          out.label[static_cast<std::size_t>(w)] = id;
          stack.push_back(w);
        }
      }
    }
    out.sizes.push_back(size);
  }
  return out;
}

std::int64_t circuit_rank(const Graph& g) {
  return static_cast<std::int64_t>(g.num_edges()) - g.num_nodes() + connected_components(g).count();
}

std::int64_t triangle_count(const Graph& g) {
  std::int64_t count = 0;
  for (const Edge& e : g.edges()) {
    const auto& a = g.neighbors(e.u);
    const auto& b = g.neighbors(e.v);
    auto ia = std::upper_bound(a.begin(), a.end(), e.v);
    auto ib = std::upper_bound(b.begin(), b.end(), e.v);
    while (ia != a.end() && ib != b.end()) {
      if (*ia < *ib) {
        ++ia;
      } else if (*ib < *ia) {
        ++ib;
      } else {
        ++count;
        ++ia;
        ++ib;
      }
    }
  }
  return count;
}

double global_clustering(const Graph& g) {
  double triples = 0.0;
  for (int i = 0; i < g.num_nodes(); ++i) {
    const double k = g.degree(i);
    triples += 0.5 * k * (k - 1.0);
  }
  if (triples == 0.0) return 0.0;
  return 3.0 * static_cast<double>(triangle_count(g)) / triples;
}

Eigen::VectorXd betweenness(const Graph& g) { return betweenness_from(shortest_path_stats(g), g.num_nodes()); }

double betweenness_mean(const Graph& g) {
  if (g.num_nodes() == 0) return 0.0;
  return betweenness(g).mean();
}

Eigen::VectorXd closeness(const Graph& g) { return closeness_from(shortest_path_stats(g), g.num_nodes()); }

double closeness_mean(const Graph& g) {
  if (g.num_nodes() == 0) return 0.0;
  return closeness(g).mean();
}

Eigen::VectorXd eigenvector_centrality(const Graph& g, const PowerIterationOptions& options) {
  const int n = g.num_nodes();
  Eigen::VectorXd z = Eigen::VectorXd::Zero(n);
  if (n == 0 || g.num_edges() == 0) return z;

  const Components comps = connected_components(g);
  const auto largest = static_cast<int>(std::max_element(comps.sizes.begin(), comps.sizes.end()) - comps.sizes.begin());
  std::vector<int> members;
  std::vector<int> local(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    if (comps.label[static_cast<std::size_t>(i)] == largest) {
      local[static_cast<std::size_t>(i)] = static_cast<int>(members.size());
      members.push_back(i);
    }
  }
  const auto size = static_cast<Eigen::Index>(members.size());
  Eigen::VectorXd x = Eigen::VectorXd::Constant(size, 1.0 / std::sqrt(static_cast<double>(size)));
  Eigen::VectorXd next(size);
  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (Eigen::Index a = 0; a < size; ++a) {
      double acc = x(a);
      for (int w : g.neighbors(members[static_cast<std::size_t>(a)])) acc += x(local[static_cast<std::size_t>(w)]);
      next(a) = acc;
    }
    next /= next.norm();
    const double change = (next - x).cwiseAbs().maxCoeff();
    x.swap(next);
    if (change < options.tolerance) break;
  }
  for (Eigen::Index a = 0; a < size; ++a) z(members[static_cast<std::size_t>(a)]) = std::abs(x(a));
  return z;
}

double eigenvector_mean(const Graph& g) {
  if (g.num_nodes() == 0) return 0.0;
  return eigenvector_centrality(g).mean();
}

double mean_path_length(const Graph& g) { return path_length_from(shortest_path_stats(g)); }

double modularity(const Graph& g, std::span<const int> communities) {
  const int n = g.num_nodes();
  if (static_cast<int>(communities.size()) != n) throw ConfigError("modularity: partition size mismatch");
  const double two_m = 2.0 * g.num_edges();
  if (two_m == 0.0) return 0.0;
  std::map<int, double> internal;
  std::map<int, double> degree_sum;
  for (int i = 0; i < n; ++i) degree_sum[communities[static_cast<std::size_t>(i)]] += g.degree(i);
  for (const Edge& e : g.edges()) {
    if (communities[static_cast<std::size_t>(e.u)] == communities[static_cast<std::size_t>(e.v)]) {
      internal[communities[static_cast<std::size_t>(e.u)]] += 2.0;
    }
  }
  double q = 0.0;
  for (const auto& [c, k] : degree_sum) {
    const auto it = internal.find(c);
    const double in = it == internal.end() ? 0.0 : it->second;
    q += in / two_m - (k / two_m) * (k / two_m);
  }
  return q;
}

CommunityResult modularity_greedy(const Graph& g) {
  const int n = g.num_nodes();
  CommunityResult result;
  result.communities.resize(static_cast<std::size_t>(n));
  std::iota(result.communities.begin(), result.communities.end(), 0);
  if (g.num_edges() == 0) return result;

  const double inv_two_m = 1.0 / (2.0 * g.num_edges());
  std::vector<double> a(static_cast<std::size_t>(n));
  std::vector<std::map<int, double>> e(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = g.degree(i) * inv_two_m;
  for (const Edge& edge : g.edges()) {
    e[static_cast<std::size_t>(edge.u)][edge.v] = inv_two_m;
    e[static_cast<std::size_t>(edge.v)][edge.u] = inv_two_m;
  }

  struct Entry {
    double dq;
    int i;
    int j;
    std::uint64_t ver_i;
    std::uint64_t ver_j;
  };
  // Max-heap on dq; among equal dq the lexicographically smallest (i, j) wins.
  auto worse = [](const Entry& x, const Entry& y) {
    if (x.dq != y.dq) return x.dq < y.dq;
    return std::tie(x.i, x.j) > std::tie(y.i, y.j);
  };
  std::priority_queue<Entry, std::vector<Entry>, decltype(worse)> heap(worse);
  std::vector<std::uint64_t> version(static_cast<std::size_t>(n), 0);
  std::vector<bool> alive(static_cast<std::size_t>(n), true);

  auto push = [&](int i, int k, double eik) {
    const int lo = std::min(i, k);
    const int hi = std::max(i, k);
    heap.push({2.0 * (eik - a[static_cast<std::size_t>(i)] * a[static_cast<std::size_t>(k)]), lo, hi,
               version[static_cast<std::size_t>(lo)], version[static_cast<std::size_t>(hi)]});
  };
  for (const Edge& edge : g.edges()) push(edge.u, edge.v, inv_two_m);

  double q = 0.0;
  for (double ai : a) q -= ai * ai;
  double best_q = q;
  std::size_t best_merges = 0;
  std::vector<std::pair<int, int>> merges;

  while (!heap.empty()) {
    const Entry top = heap.top();
    heap.pop();
    const auto ui = static_cast<std::size_t>(top.i);
    const auto uj = static_cast<std::size_t>(top.j);
    if (!alive[ui] || !alive[uj] || version[ui] != top.ver_i || version[uj] != top.ver_j) continue;

    // Absorb j into i.
    for (const auto& [k, ejk] : e[uj]) {
      if (k == top.i) continue;
      e[ui][k] += ejk;
      auto& row = e[static_cast<std::size_t>(k)];
      row[top.i] += ejk;
      row.erase(top.j);
    }
    e[ui].erase(top.j);
    e[uj].clear();
    a[ui] += a[uj];
    a[uj] = 0.0;
    alive[uj] = false;
    ++version[ui];
    q += top.dq;
    merges.emplace_back(top.i, top.j);
    if (q > best_q) {
      best_q = q;
      best_merges = merges.size();
    }
    for (const auto& [k, eik] : e[ui]) push(top.i, k, eik);
  }

  std::vector<int> parent(static_cast<std::size_t>(n));
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  };
  for (std::size_t t = 0; t < best_merges; ++t) parent[static_cast<std::size_t>(find(merges[t].second))] = find(merges[t].first);

  std::map<int, int> relabel;
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    const auto [it, inserted] = relabel.emplace(root, static_cast<int>(relabel.size()));
    result.communities[static_cast<std::size_t>(i)] = it->second;
  }
  result.modularity = modularity(g, result.communities);
  return result;
}

MetricPanel metric_panel(const Graph& g) {
  MetricPanel p;
  p.n = g.num_nodes();
  p.m = g.num_edges();
  p.edge_density = g.density();
  p.components = connected_components(g).count();
  p.circuit_rank = static_cast<std::int64_t>(p.m) - p.n + p.components;
  p.triangles = triangle_count(g);
  p.clustering = global_clustering(g);
  if (p.n > 0) {
    const ShortestPathStats stats = shortest_path_stats(g);
    p.mean_betweenness = betweenness_from(stats, p.n).mean();
    p.mean_closeness = closeness_from(stats, p.n).mean();
    p.mean_path_length = path_length_from(stats);
    p.mean_eigenvector = eigenvector_mean(g);
  }
  p.modularity = modularity_greedy(g).modularity;
  return p;
}

}  // namespace hcls
