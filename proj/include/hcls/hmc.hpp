#pragma once

// Full Bayesian inference for the hyperbolic latent space model with
// learnable temperature, by Hamiltonian Monte Carlo on an unconstrained
// parameterization:
//
//   R = exp(log_R)                 R ~ Exponential(1)
//   alpha                          alpha | R ~ Normal(R, 0.1)
//   T = 0.5 logistic(t)            T ~ Gamma(0.1, 1) truncated to (0, 0.5)
//   u_i = logistic(s_i)            u_i ~ Uniform(0, 1)
//   r_i = arccosh(1 + (cosh R - 1) u_i)
//   theta_i (unwrapped)            uniform angle
//
// The likelihood is Bernoulli in log-odds form, eta_ij = (alpha - d_ij) / 2T.

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hcls/generative.hpp"
#include "hcls/geometry.hpp"
#include "hcls/graph.hpp"
#include "hcls/random.hpp"

namespace hcls {

/// Log density with gradient written into the second argument.
using LogDensityFn = std::function<double(const Eigen::VectorXd&, Eigen::VectorXd&)>;

struct HmcConfig {
  int warmup = 1000;
  int draws = 1000;
  double step_size = 0.01;  ///< initial value; adapted during warmup
  int n_leapfrog = 32;
  std::uint64_t seed = 1;
  double target_accept = 0.8;
  bool adapt_step_size = true;
  int thin = 1;  ///< keep every thin-th post-warmup draw
  int init_optim_steps = 1500;  ///< Adam ascent steps on the log posterior before sampling
};

/// Runs L leapfrog steps in place with identity mass matrix. grad must hold
/// the gradient at q on entry; on return it holds the gradient at the new q.
/// Returns the log density at the final position.
double leapfrog(const LogDensityFn& log_density, Eigen::VectorXd& q, Eigen::VectorXd& p, Eigen::VectorXd& grad,
                double step_size, int steps);

/// Raw chain on the unconstrained scale.
struct ChainResult {
  std::vector<Eigen::VectorXd> samples;
  std::vector<double> log_density;
  double acceptance_rate = 0.0;  ///< mean Metropolis acceptance probability after warmup
  int warmup_divergences = 0;
  int divergences = 0;
  double step_size = 0.0;  ///< adapted step size used after warmup
  bool diagnostic_failure = false;
};

/// Generic static-path HMC with dual-averaging step-size adaptation.
ChainResult run_hmc(const LogDensityFn& log_density, Eigen::VectorXd init, const HmcConfig& config);

/// Index map of the unconstrained state vector:
/// [log_R, alpha, (t), s_0..s_{n-1}, theta_0..theta_{n-1}].
struct StateLayout {
  int n = 0;
  bool learn_temperature = true;

  int log_R() const { return 0; }
  int alpha() const { return 1; }
  int logit_T() const { return 2; }
  int radial(int i) const { return (learn_temperature ? 3 : 2) + i; }
  int angle(int i) const { return (learn_temperature ? 3 : 2) + n + i; }
  int size() const { return (learn_temperature ? 3 : 2) + 2 * n; }
};

/// Posterior density of (X, R, alpha, T) given an observed graph.
class HclsPosterior {
 public:
  /// fixed_T removes the temperature from the state vector.
  explicit HclsPosterior(const Graph& g, std::optional<double> fixed_T = std::nullopt);

  const StateLayout& layout() const { return layout_; }
  int dim() const { return layout_.size(); }

  /// Value and exact gradient. Throws NumericalError naming the first
  /// non-finite coordinate.
  double log_posterior(const Eigen::VectorXd& state, Eigen::VectorXd& grad) const;
  double log_posterior(const Eigen::VectorXd& state) const;

  ModelParams params(const Eigen::VectorXd& state) const;
  std::vector<PolarPoint> positions(const Eigen::VectorXd& state) const;

  /// Unconstrained state for given constrained values.
  Eigen::VectorXd encode(const ModelParams& params, std::span<const PolarPoint> positions) const;

  /// Radius matched to the observed density at alpha = R, T = 0.1 (or the
  /// fixed T) with positions drawn from the prior.
  Eigen::VectorXd prior_state(Rng& rng) const;

  /// Density-matched radius, angles from a regularized Laplacian eigenmap and
  /// radial quantiles assigned by degree rank, refined by optim_steps of Adam
  /// ascent on the log posterior.
  Eigen::VectorXd initial_state(Rng& rng, int optim_steps = 1500) const;

  /// Adam ascent on the log posterior, returns the best state visited.
  Eigen::VectorXd optimize(Eigen::VectorXd state, int steps, double learning_rate = 0.05) const;

  LogDensityFn as_function() const;

 private:
  int n_;
  std::optional<double> fixed_T_;
  StateLayout layout_;

  std::vector<std::uint8_t> adjacency_;  // dense n x n
  Graph graph_;
  double observed_density_;
};

struct PosteriorDraw {
  ModelParams params;
  std::vector<PolarPoint> positions;
};

struct PosteriorDraws {
  std::vector<PosteriorDraw> draws;
  double acceptance_rate = 0.0;
  int divergence_count = 0;
  int warmup_divergences = 0;
  double step_size = 0.0;
  bool diagnostic_failure = false;
  std::optional<double> fixed_T;
  std::map<std::string, std::vector<double>> traces;  ///< "R", "alpha", "T"
};

PosteriorDraws hmc_sample(const Graph& g, const HmcConfig& config);

/// Same sampler with T pinned at T_fixed.
PosteriorDraws fixed_temperature_mode(const Graph& g, double T_fixed, const HmcConfig& config);

/// Posterior mean of every pairwise hyperbolic distance.
Eigen::MatrixXd posterior_distance_summary(const PosteriorDraws& draws);

/// Posterior mean edge probability per pair.
Eigen::MatrixXd posterior_edge_probabilities(const PosteriorDraws& draws);

/// Effective sample size from the initial positive sequence of autocorrelations.
double effective_sample_size(std::span<const double> chain);

/// Split-R-hat of a single chain cut into two halves.
double split_rhat(std::span<const double> chain);

}  // namespace hcls
