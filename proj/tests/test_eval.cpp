#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "hcls/errors.hpp"
#include "hcls/eval.hpp"
#include "hcls/random.hpp"
#include "oracles.hpp"

using namespace hcls;
using doctest::Approx;

namespace {

Eigen::MatrixXd random_scores(int n, Rng& rng, int levels = 0) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      // With levels > 0 scores are coarse so ties are common.
      s(i, j) = s(j, i) = levels > 0 ? std::floor(u(rng) * levels) / levels : u(rng);
    }
  }
  return s;
}

Graph random_graph(int n, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (u(rng) < 0.4) g.add_edge(i, j);
    }
  }
  return g;
}

bool has_both_classes(const Graph& g) {
  const int pairs = g.num_nodes() * (g.num_nodes() - 1) / 2;
  return g.num_edges() > 0 && g.num_edges() < pairs;
}

}  // namespace

TEST_CASE("midranks average ties") {
  Eigen::VectorXd v(5);
  v << 3.0, 1.0, 3.0, 2.0, 3.0;
  Eigen::VectorXd want(5);
  want << 4.0, 1.0, 4.0, 2.0, 4.0;
  CHECK(midranks(v) == want);
}

TEST_CASE("AUC closed cases") {
  Graph g(3);
  g.add_edge(0, 1);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  s(0, 1) = s(1, 0) = 0.9;
  s(0, 2) = s(2, 0) = 0.1;
  s(1, 2) = s(2, 1) = 0.2;
  CHECK(auc(s, g) == 1.0);
  CHECK(auc(-s, g) == 0.0);
  CHECK(auc(Eigen::MatrixXd::Constant(3, 3, 0.3), g) == 0.5);
  s(0, 2) = s(2, 0) = 0.9;  // one tie, one win
  CHECK(auc(s, g) == 0.75);
  CHECK_THROWS_AS(auc(s, Graph(3)), DomainError);
}

TEST_SUITE("properties") {
  TEST_CASE("AUC equals brute-force pair counting") {
    Rng rng(1);
    std::uniform_int_distribution<int> size(3, 8);
    int checked = 0;
    for (int k = 0; k < 500; ++k) {
      const int n = size(rng);
      const Graph g = random_graph(n, rng);
      if (!has_both_classes(g)) continue;
      const Eigen::MatrixXd s = random_scores(n, rng, k % 2 == 0 ? 4 : 0);
      CHECK(auc(s, g) == Approx(oracle::auc(s, g)).epsilon(1e-14));
      ++checked;
    }
    CHECK(checked > 300);
  }
}

TEST_CASE("AUC is invariant to strictly increasing transforms") {
  Rng rng(2);
  for (int k = 0; k < 50; ++k) {
    const Graph g = random_graph(15, rng);
    if (!has_both_classes(g)) continue;
    const Eigen::MatrixXd s = random_scores(15, rng, 6);
    const Eigen::MatrixXd t = (3.0 * s.array()).exp() - 7.0;
    CHECK(auc(t, g) == auc(s, g));
  }
}

TEST_CASE("accuracy") {
  Graph g(3);
  g.add_edge(0, 1);
  Eigen::MatrixXd s = Eigen::MatrixXd::Zero(3, 3);
  s(0, 1) = s(1, 0) = 0.5;  // at threshold counts as an edge
  CHECK(accuracy(s, g) == 1.0);
  CHECK(accuracy(s, g, 0.6) == Approx(2.0 / 3.0));
  CHECK(accuracy(Eigen::MatrixXd::Ones(3, 3), g) == Approx(1.0 / 3.0));

  // A score and its complement at threshold 1/2 disagree on every pair
  // except the ties at exactly 1/2.
  Rng rng(3);
  for (int k = 0; k < 20; ++k) {
    const Graph h = random_graph(10, rng);
    const Eigen::MatrixXd p = random_scores(10, rng);
    const Eigen::MatrixXd q = 1.0 - p.array();
    CHECK(accuracy(p, h) + accuracy(q, h) == Approx(1.0));
  }
}

TEST_CASE("correlations") {
  Eigen::VectorXd x(6), y(6);
  x << 1, 2, 3, 4, 5, 6;
  y << 2, 4, 6, 8, 10, 12;
  CHECK(pearson(x, y) == Approx(1.0));
  CHECK(pearson(x, -y) == Approx(-1.0));

  Rng rng(4);
  const Eigen::MatrixXd d = random_scores(12, rng);
  const Eigen::MatrixXd e = (4.0 * d.array()).exp();
  const Correlations c = distance_correlations(d, e);
  CHECK(c.spearman == Approx(1.0));
  CHECK(c.pearson < 1.0);
  CHECK(c.pearson > 0.8);
  CHECK(upper_triangle(d).size() == 66);
  CHECK(upper_triangle(d)(0) == d(0, 1));
  CHECK(upper_triangle(d)(11) == d(1, 2));
}

TEST_CASE("paired comparison") {
  std::vector<ComparisonRecord> recs;
  const auto add = [&](int rep, const char* model, double v) { recs.push_back({"N=50,R=3", rep, model, v}); };
  add(0, "H", 0.9);
  add(0, "E", 0.8);
  add(1, "H", 0.7);
  add(1, "E", 0.95);
  add(2, "H", 0.85);
  add(2, "E", 0.85);
  recs.push_back({"N=50,R=5", 0, "H", 0.6});
  recs.push_back({"N=50,R=5", 0, "E", 0.5});
  const ComparisonSummary s = paired_comparison(recs);
  REQUIRE(s.size() == 2);
  const ModelSummary& h = s.at("N=50,R=3").at("H");
  const ModelSummary& e = s.at("N=50,R=3").at("E");
  CHECK(h.mean == Approx(2.45 / 3.0));
  CHECK(h.max == 0.9);
  CHECK(h.count == 3);
  CHECK(h.prop_best == Approx(2.0 / 3.0));
  CHECK(e.prop_best == Approx(2.0 / 3.0));
  CHECK(e.mean == Approx(0.8666666666666667));
  CHECK(s.at("N=50,R=5").at("H").prop_best == 1.0);
  CHECK(s.at("N=50,R=5").at("E").prop_best == 0.0);
}
