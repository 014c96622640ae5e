#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <string>

#include "hcls/errors.hpp"
#include "hcls/experiment.hpp"

using namespace hcls;
using doctest::Approx;

namespace {

std::string first_line(const std::string& s) { return s.substr(0, s.find('\n')); }

int count_lines(const std::string& s) { return static_cast<int>(std::count(s.begin(), s.end(), '\n')); }

ReconstructionStudy tiny_study(int jobs) {
  ReconstructionStudy st;
  st.cells = {GridCell{30, 3.0}, GridCell{30, 5.0}};
  st.replicates = 2;
  st.fit.vi.epochs = 60;
  st.fit.vi.hidden_dim = 8;
  st.fit.vi.warm_start_epochs = 20;
  st.seed = 5;
  st.jobs = jobs;
  return st;
}

}  // namespace

TEST_CASE("names round-trip") {
  for (FitModel m : {FitModel::Hcls, FitModel::HclsFixedT, FitModel::Ecls}) CHECK(parse_fit_model(to_string(m)) == m);
  for (Engine e : {Engine::Vi, Engine::Hmc}) CHECK(parse_engine(to_string(e)) == e);
  CHECK_THROWS_AS(parse_fit_model("nope"), ConfigError);
}

TEST_CASE("grid cell keys") {
  CHECK(GridCell{100, 5.0}.key() == "N=100,R=5");
  CHECK(GridCell{50, 3.0, Geometry::Euclidean, 0.5}.key() == "N=50,R=3,euclidean,T=0.5");
  CHECK(GridCell{50, 3.0, Geometry::Hyperbolic, 0.5}.key() != GridCell{50, 3.0}.key());
}

TEST_CASE("replicate seeds are distinct and order independent") {
  std::set<std::uint64_t> seen;
  for (int n : {30, 50, 100}) {
    for (double R : {3.0, 5.0}) {
      for (int rep = 0; rep < 10; ++rep) seen.insert(replicate_seed(1, GridCell{n, R}, rep));
    }
  }
  CHECK(seen.size() == 60);
  CHECK(replicate_seed(1, GridCell{30, 3.0}, 2) == replicate_seed(1, GridCell{30, 3.0}, 2));
  CHECK(replicate_seed(2, GridCell{30, 3.0}, 2) != replicate_seed(1, GridCell{30, 3.0}, 2));
}

TEST_CASE("simulate matches densities across geometries") {
  const GridCell h{100, 5.0}, e{100, 5.0, Geometry::Euclidean, 0.01};
  double dh = 0.0, de = 0.0;
  for (int rep = 0; rep < 10; ++rep) {
    dh += simulate(h, replicate_seed(3, h, rep)).graph.density() / 10;
    de += simulate(e, replicate_seed(3, e, rep)).graph.density() / 10;
  }
  CHECK(de == Approx(dh).epsilon(0.2));
  const SimulatedGraph s = simulate(h, 9);
  CHECK(s.truth.params.alpha == 5.0);
  CHECK(simulate(h, 9).graph == s.graph);
  CHECK_THROWS_AS(simulate(GridCell{20, 3.0, Geometry::Spherical, 0.1}, 1), ConfigError);
}

TEST_CASE("HMC rejects the Euclidean model") {
  const Graph g = simulate(GridCell{20, 3.0}, 1).graph;
  FitOptions opt;
  opt.engine = Engine::Hmc;
  CHECK_THROWS_AS(fit_model(g, FitModel::Ecls, opt), ConfigError);
}

TEST_CASE("reconstruction results do not depend on the worker count") {
  const ReconstructionStudy one = tiny_study(1), two = tiny_study(3);
  const ReconstructionResult a = run_reconstruction(one), b = run_reconstruction(two);
  REQUIRE(a.auc.size() == 2 * 2 * 3);
  REQUIRE(b.auc.size() == a.auc.size());
  for (std::size_t k = 0; k < a.auc.size(); ++k) {
    CHECK(a.auc[k].cell == b.auc[k].cell);
    CHECK(a.auc[k].model == b.auc[k].model);
    CHECK(a.auc[k].replicate == b.auc[k].replicate);
    CHECK(a.auc[k].value == b.auc[k].value);
    CHECK(a.accuracy[k].value == b.accuracy[k].value);
  }

  std::ostringstream cmp, pair, rec;
  write_comparison_csv(cmp, one, a);
  write_pairwise_csv(pair, one, a);
  write_records_csv(rec, a);
  CHECK(first_line(cmp.str()) ==
        "N,R,geometry,T,model,avg_auc,max_auc,best_auc,avg_accuracy,max_accuracy,best_accuracy,replicates");
  CHECK(count_lines(cmp.str()) == 1 + 2 * 3);
  CHECK(first_line(pair.str()) == "N,R,geometry,T,model_a,model_b,wins_a,ties,replicates,prop_a_better");
  CHECK(count_lines(pair.str()) == 1 + 2 * 6);
  CHECK(first_line(rec.str()) == "cell,replicate,model,auc,accuracy");
  CHECK(count_lines(rec.str()) == 1 + 12);
}

TEST_CASE("tree-likeness ensembles") {
  EnsembleOptions opt;
  opt.n = 40;
  opt.R = 4.0;
  opt.temperatures = {0.01, 0.5};
  opt.replicates = 3;
  const auto ens = run_tree_likeness(opt);
  REQUIRE(ens.size() == 4);
  for (const auto& e : ens) CHECK(e.panels.size() == 3);

  std::ostringstream sum, panels, hdr;
  write_ensemble_summary_csv(sum, ens);
  write_ensemble_panels_csv(panels, ens);
  write_metrics_header(hdr);
  CHECK(first_line(sum.str()) == "geometry,T,alpha,metric,mean,sd,replicates");
  CHECK(first_line(hdr.str()) ==
        "n,m,density,circuit_rank,clustering,mean_betweenness,mean_closeness,mean_eigenvector,mean_path_length,"
        "modularity");
  CHECK(first_line(panels.str()) == "geometry,T,replicate," + first_line(hdr.str()));
  CHECK(count_lines(panels.str()) == 1 + 4 * 3);
}
