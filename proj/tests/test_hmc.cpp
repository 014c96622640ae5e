#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hcls/errors.hpp"
#include "hcls/generative.hpp"
#include "hcls/hmc.hpp"

using namespace hcls;
using doctest::Approx;

namespace {

struct Fixture {
  LatentConfiguration truth;
  Graph graph;
};

Fixture small_graph(int n, std::uint64_t seed, double R = 4.0, double T = 0.1) {
  Rng rng(seed);
  Fixture f;
  f.truth = sample_positions(Geometry::Hyperbolic, n, ModelParams{R, R, T}, rng);
  f.graph = generate_graph(f.truth, rng);
  return f;
}

Eigen::VectorXd random_state(const HclsPosterior& post, Rng& rng) {
  std::normal_distribution<double> z(0.0, 1.0);
  Eigen::VectorXd s(post.dim());
  for (int k = 0; k < s.size(); ++k) s(k) = z(rng);
  s(post.layout().log_R()) = std::log(3.0) + 0.3 * z(rng);
  s(post.layout().alpha()) = 3.0 + 0.3 * z(rng);
  for (int i = 0; i < post.layout().n; ++i) s(post.layout().angle(i)) = 3.0 * z(rng);
  return s;
}

// Worst relative error of the analytic gradient against central differences.
double gradient_error(const HclsPosterior& post, const Eigen::VectorXd& s, double h) {
  Eigen::VectorXd grad(post.dim());
  post.log_posterior(s, grad);
  double worst = 0.0;
  for (int k = 0; k < s.size(); ++k) {
    Eigen::VectorXd up = s, down = s;
    up(k) += h;
    down(k) -= h;
    const double fd = (post.log_posterior(up) - post.log_posterior(down)) / (2 * h);
    worst = std::max(worst, std::abs(grad(k) - fd) / std::max(1.0, std::abs(fd)));
  }
  return worst;
}

LogDensityFn standard_normal() {
  return [](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
    g = -q;
    return -0.5 * q.squaredNorm();
  };
}

// Correlated Gaussian with precision diag(1, 4, 9).
LogDensityFn anisotropic_normal() {
  return [](const Eigen::VectorXd& q, Eigen::VectorXd& g) {
    const Eigen::Vector3d prec(1.0, 4.0, 9.0);
    g = -prec.cwiseProduct(q);
    return -0.5 * q.dot(prec.cwiseProduct(q));
  };
}

}  // namespace

TEST_CASE("state layout") {
  const StateLayout learn{10, true}, fixed{10, false};
  CHECK(learn.size() == 23);
  CHECK(fixed.size() == 22);
  CHECK(learn.radial(0) == 3);
  CHECK(learn.angle(9) == 22);
  CHECK(fixed.radial(0) == 2);

  const Fixture f = small_graph(10, 1);
  CHECK(HclsPosterior(f.graph).dim() == 23);
  CHECK(HclsPosterior(f.graph, 0.2).dim() == 22);
}

TEST_CASE("encode and decode round-trip") {
  const Fixture f = small_graph(12, 2);
  const HclsPosterior post(f.graph);
  const auto& pts = std::get<std::vector<PolarPoint>>(f.truth.positions);
  const Eigen::VectorXd s = post.encode(ModelParams{4.0, 3.5, 0.2}, pts);
  const ModelParams p = post.params(s);
  CHECK(p.R == Approx(4.0));
  CHECK(p.alpha == Approx(3.5));
  CHECK(p.T == Approx(0.2));
  const auto back = post.positions(s);
  for (std::size_t i = 0; i < pts.size(); ++i) {
    CHECK(back[i].r == Approx(pts[i].r).epsilon(1e-8));
    CHECK(back[i].theta == Approx(pts[i].theta).epsilon(1e-10));
  }
}

TEST_SUITE("properties") {
  TEST_CASE("log posterior gradient matches finite differences") {
    const Fixture f = small_graph(10, 3);
    Rng rng(4);
    for (std::optional<double> fixed_T : {std::optional<double>{}, std::optional<double>{0.15}}) {
      const HclsPosterior post(f.graph, fixed_T);
      for (int rep = 0; rep < 5; ++rep) {
        CHECK(gradient_error(post, random_state(post, rng), 1e-5) < 1e-4);
      }
    }
  }

  TEST_CASE("leapfrog is reversible") {
    const Fixture f = small_graph(10, 5);
    const HclsPosterior post(f.graph);
    const LogDensityFn fn = post.as_function();
    Rng rng(6);
    std::normal_distribution<double> z(0.0, 1.0);
    for (int rep = 0; rep < 5; ++rep) {
      const Eigen::VectorXd q0 = post.optimize(random_state(post, rng), 100);
      Eigen::VectorXd p0(q0.size());
      for (int k = 0; k < p0.size(); ++k) p0(k) = z(rng);
      Eigen::VectorXd q = q0, p = p0, g(q0.size());
      fn(q, g);
      leapfrog(fn, q, p, g, 0.005, 20);
      p = -p;
      leapfrog(fn, q, p, g, 0.005, 20);
      CHECK((q - q0).cwiseAbs().maxCoeff() < 1e-8);
      CHECK((p + p0).cwiseAbs().maxCoeff() < 1e-8);
    }
  }
}

TEST_CASE("leapfrog energy error is second order in the step size") {
  const LogDensityFn fn = anisotropic_normal();
  const auto max_error = [&](double eps) {
    Eigen::VectorXd q = Eigen::Vector3d(1.0, -0.5, 0.3), p = Eigen::Vector3d(0.2, 1.0, -0.7), g(3);
    const double h0 = -fn(q, g) + 0.5 * p.squaredNorm();
    double worst = 0.0;
    const int steps = static_cast<int>(std::lround(2.0 / eps));
    for (int k = 0; k < steps; ++k) {
      const double lp = leapfrog(fn, q, p, g, eps, 1);
      worst = std::max(worst, std::abs(-lp + 0.5 * p.squaredNorm() - h0));
    }
    return worst;
  };
  const double ratio = max_error(0.02) / max_error(0.01);
  CHECK(ratio == Approx(4.0).epsilon(0.1));
}

TEST_CASE("log posterior is invariant to rotations and reflections of the angles") {
  const Fixture f = small_graph(15, 7);
  const HclsPosterior post(f.graph);
  Rng rng(8);
  for (int rep = 0; rep < 5; ++rep) {
    const Eigen::VectorXd s = random_state(post, rng);
    const double base = post.log_posterior(s);
    Eigen::VectorXd rot = s, ref = s;
    for (int i = 0; i < 15; ++i) {
      rot(post.layout().angle(i)) += 1.234;
      ref(post.layout().angle(i)) = -s(post.layout().angle(i));
    }
    CHECK(std::abs(post.log_posterior(rot) - base) < 1e-10 * std::max(1.0, std::abs(base)));
    CHECK(std::abs(post.log_posterior(ref) - base) < 1e-10 * std::max(1.0, std::abs(base)));
  }
}

TEST_CASE("non-finite state raises a numerical error") {
  const Fixture f = small_graph(8, 9);
  const HclsPosterior post(f.graph);
  Eigen::VectorXd s = Eigen::VectorXd::Zero(post.dim());
  s(post.layout().alpha()) = std::nan("");
  Eigen::VectorXd g(post.dim());
  CHECK_THROWS_AS(post.log_posterior(s, g), NumericalError);
}

TEST_CASE("generic sampler recovers a standard normal") {
  HmcConfig cfg;
  cfg.warmup = 500;
  cfg.draws = 4000;
  cfg.n_leapfrog = 10;
  cfg.step_size = 0.1;
  cfg.seed = 11;
  const ChainResult chain = run_hmc(standard_normal(), Eigen::Vector3d(2.0, -2.0, 0.5), cfg);
  REQUIRE(chain.samples.size() == 4000);
  Eigen::Vector3d mean = Eigen::Vector3d::Zero(), sq = Eigen::Vector3d::Zero();
  for (const auto& s : chain.samples) {
    mean += s;
    sq += s.cwiseProduct(s);
  }
  mean /= 4000.0;
  sq /= 4000.0;
  for (int k = 0; k < 3; ++k) {
    CHECK(std::abs(mean(k)) < 0.1);
    CHECK(sq(k) - mean(k) * mean(k) == Approx(1.0).epsilon(0.1));
  }
  CHECK(chain.acceptance_rate > 0.6);
  CHECK(chain.divergences == 0);
}

TEST_CASE("effective sample size and split R-hat") {
  Rng rng(12);
  std::normal_distribution<double> z(0.0, 1.0);
  const int n = 20000;
  const double rho = 0.9;
  std::vector<double> iid(n), ar(n), drift(n);
  // A single AR(1) chain's ESS estimate has about 8% spread at this length,
  // so average ten chains.
  double ess_ar = 0.0;
  for (int chain = 0; chain < 10; ++chain) {
    double x = 0.0;
    for (int k = 0; k < n; ++k) {
      x = rho * x + std::sqrt(1 - rho * rho) * z(rng);
      ar[k] = x;
    }
    ess_ar += effective_sample_size(ar) / 10;
  }
  for (int k = 0; k < n; ++k) {
    iid[k] = z(rng);
    drift[k] = z(rng) + 3.0 * k / n;
  }
  CHECK(effective_sample_size(iid) > 0.8 * n);
  // AR(1) has ESS n (1 - rho) / (1 + rho).
  CHECK(ess_ar == Approx(n * (1 - rho) / (1 + rho)).epsilon(0.1));
  CHECK(split_rhat(iid) < 1.01);
  CHECK(split_rhat(drift) > 1.1);
}

TEST_CASE("posterior summaries from a short chain") {
  const Fixture f = small_graph(12, 13, 4.0, 0.05);
  HmcConfig cfg;
  cfg.warmup = 100;
  cfg.draws = 40;
  cfg.n_leapfrog = 16;
  cfg.init_optim_steps = 200;
  cfg.seed = 14;
  const PosteriorDraws draws = hmc_sample(f.graph, cfg);
  REQUIRE(draws.draws.size() == 40);
  CHECK(draws.traces.at("T").size() == 40);
  for (const auto& d : draws.draws) {
    CHECK(d.params.T > 0.0);
    CHECK(d.params.T < 0.5);
    for (const auto& p : d.positions) CHECK(p.r <= d.params.R * (1 + 1e-12));
  }
  const Eigen::MatrixXd dist = posterior_distance_summary(draws);
  CHECK((dist - dist.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(dist.diagonal().cwiseAbs().maxCoeff() == 0.0);
  const Eigen::MatrixXd prob = posterior_edge_probabilities(draws);
  CHECK((prob - prob.transpose()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(prob.minCoeff() >= 0.0);
  CHECK(prob.maxCoeff() <= 1.0);

  const PosteriorDraws fixed = fixed_temperature_mode(f.graph, 0.3, cfg);
  REQUIRE(fixed.fixed_T.has_value());
  for (const auto& d : fixed.draws) CHECK(d.params.T == 0.3);
}
