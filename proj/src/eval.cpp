#include "hcls/eval.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "hcls/errors.hpp"

namespace hcls {

Eigen::VectorXd midranks(const Eigen::VectorXd& values) {
  const Eigen::Index n = values.size();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) { return values(a) < values(b); });
  Eigen::VectorXd ranks(n);
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && values(order[static_cast<std::size_t>(end)]) == values(order[static_cast<std::size_t>(start)])) ++end;
    const double rank = 0.5 * static_cast<double>(start + 1 + end);
    for (Eigen::Index k = start; k < end; ++k) ranks(order[static_cast<std::size_t>(k)]) = rank;
    start = end;
  }
  return ranks;
}

Eigen::VectorXd upper_triangle(const Eigen::MatrixXd& m) {
  const Eigen::Index n = m.rows();
  Eigen::VectorXd out(n * (n - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) out(k++) = m(i, j);
  }
  return out;
}

namespace {

void check_shape(const Eigen::MatrixXd& scores, const Graph& truth) {
  if (scores.rows() != truth.num_nodes() || scores.cols() != truth.num_nodes()) {
    throw ConfigError("score matrix does not match graph size");
  }
}

}  // namespace

double auc(const Eigen::MatrixXd& scores, const Graph& truth) {
  check_shape(scores, truth);
  const Eigen::VectorXd flat = upper_triangle(scores);
  const Eigen::VectorXd ranks = midranks(flat);
  const int n = truth.num_nodes();
  const double positives = truth.num_edges();
  const double negatives = static_cast<double>(flat.size()) - positives;
  if (positives == 0.0 || negatives == 0.0) throw DomainError("auc: truth needs at least one edge and one non-edge");
  double rank_sum = 0.0;
  Eigen::Index k = 0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j, ++k) {
      if (truth.has_edge(i, j)) rank_sum += ranks(k);
    }
  }
  return (rank_sum - positives * (positives + 1.0) / 2.0) / (positives * negatives);
}

double accuracy(const Eigen::MatrixXd& scores, const Graph& truth, double threshold) {
  check_shape(scores, truth);
  const int n = truth.num_nodes();
  if (n < 2) throw DomainError("accuracy: need at least two nodes");
  double hits = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if ((scores(i, j) >= threshold) == truth.has_edge(i, j)) hits += 1.0;
    }
  }
  return hits / (0.5 * n * (n - 1.0));
}

double pearson(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("pearson: need two equal-length samples");
  const Eigen::VectorXd cx = x.array() - x.mean();
  const Eigen::VectorXd cy = y.array() - y.mean();
  const double denom = std::sqrt(cx.squaredNorm() * cy.squaredNorm());
  if (denom == 0.0) return 0.0;
  return cx.dot(cy) / denom;
}

Correlations distance_correlations(const Eigen::MatrixXd& true_d, const Eigen::MatrixXd& inferred_d) {
  if (true_d.rows() != inferred_d.rows() || true_d.cols() != inferred_d.cols() || true_d.rows() != true_d.cols()) {
    throw ConfigError("distance_correlations: matrices must be square and of equal size");
  }
  const Eigen::VectorXd a = upper_triangle(true_d);
  const Eigen::VectorXd b = upper_triangle(inferred_d);
  return {pearson(a, b), pearson(midranks(a), midranks(b))};
}

ComparisonSummary paired_comparison(const std::vector<ComparisonRecord>& records) {
  ComparisonSummary summary;
  // (cell, replicate) -> best value across models
  std::map<std::pair<std::string, int>, double> best;
  for (const auto& r : records) {
    auto [it, inserted] = best.emplace(std::make_pair(r.cell, r.replicate), r.value);
    if (!inserted) it->second = std::max(it->second, r.value);
  }
  std::map<std::string, std::map<std::string, double>> sums;
  std::map<std::string, std::map<std::string, int>> wins;
  for (const auto& r : records) {
    auto& s = summary[r.cell][r.model];
    if (s.count == 0 || r.value > s.max) s.max = r.value;
    ++s.count;
    sums[r.cell][r.model] += r.value;
    if (r.value == best.at({r.cell, r.replicate})) ++wins[r.cell][r.model];
  }
  for (auto& [cell, models] : summary) {
    for (auto& [model, s] : models) {
      s.mean = sums[cell][model] / s.count;
      s.prop_best = static_cast<double>(wins[cell][model]) / s.count;
    }
  }
  return summary;
}

}  // namespace hcls
