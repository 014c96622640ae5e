#pragma once

// Auto-encoding variational inference. A two-layer graph convolution maps
// one-hot node features to a factorized Gaussian over Euclidean auxiliaries
// (z_r, z_theta) per node, which are pushed deterministically onto the
// hyperbolic disk (or scaled by tau for the Euclidean model).

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "hcls/generative.hpp"
#include "hcls/geometry.hpp"
#include "hcls/graph.hpp"
#include "hcls/random.hpp"

namespace hcls {

enum class LatentModel { Hyperbolic, Euclidean };

/// Layer 1 is n x hidden (identity features make X W1 = W1); layer 2 is
/// hidden x 4 with columns (mu_r, log sigma_r, mu_theta, log sigma_theta).
struct EncoderWeights {
  Eigen::MatrixXd w1;
  Eigen::MatrixXd w2;

  int num_nodes() const { return static_cast<int>(w1.rows()); }
  int hidden() const { return static_cast<int>(w1.cols()); }
  static EncoderWeights zeros(int n, int hidden);
  /// Glorot-uniform initialization.
  static EncoderWeights glorot(int n, int hidden, Rng& rng);
};

inline constexpr double kSigmaMin = 1e-4;
inline constexpr double kSigmaMax = 10.0;

/// Per-node Gaussian parameters.
struct EncoderOutput {
  Eigen::VectorXd mu_r, sigma_r, mu_theta, sigma_theta;
};

/// D^-1/2 (A + I) D^-1/2 with D the degree matrix of A + I.
Eigen::SparseMatrix<double> normalized_adjacency(const Graph& g);

/// Forward pass. Throws ConfigError when the weight shapes do not match.
EncoderOutput gcn_encode(const Eigen::SparseMatrix<double>& a_hat, const EncoderWeights& w);
EncoderOutput gcn_encode(const Graph& g, const EncoderWeights& w);

/// u = logistic(z_r), r = arccosh(1 + (cosh R - 1) u), theta = z_theta mod 2pi.
PolarPoint decode_to_disk(double z_r, double z_theta, double R);

struct VariationalConfig {
  int epochs = 2000;
  double learning_rate = 0.01;
  int hidden_dim = 128;
  int n_mc = 1;
  std::uint64_t seed = 1;
  std::optional<double> fixed_T;  ///< pins T and drops it from the optimized globals
  double clip_norm = 10.0;
  int warm_start_epochs = 300;  ///< least-squares pretraining toward the spectral layout; 0 disables
};

/// Encoder plus global parameters on the unconstrained scale:
/// globals = (log R, alpha, t) for the hyperbolic model and
/// (log tau, alpha, t) for the Euclidean one, with T = 0.5 logistic(t).
struct VariationalState {
  LatentModel model = LatentModel::Hyperbolic;
  EncoderWeights encoder;
  Eigen::Vector3d globals = Eigen::Vector3d::Zero();
  std::optional<double> fixed_T;

  // Adam moments, laid out as [w1, w2, globals].
  Eigen::VectorXd adam_m, adam_v;
  int step = 0;

  std::vector<double> elbo_trace;
  VariationalConfig config;

  double temperature() const;
  /// R for the hyperbolic model; for the Euclidean model R = 2.448 tau.
  ModelParams params() const;
  double tau() const;  ///< Euclidean spread; 0 for the hyperbolic model
  int num_parameters() const;
};

struct ElboTerms {
  double value = 0.0;
  double log_likelihood = 0.0;  ///< Monte Carlo mean
  double kl = 0.0;
  double log_prior = 0.0;
};

/// Same shapes as the optimized parameters.
struct ElboGradient {
  Eigen::MatrixXd w1, w2;
  Eigen::Vector3d globals = Eigen::Vector3d::Zero();

  Eigen::VectorXd flatten() const;
};

/// Holds the graph-derived quantities reused across ELBO evaluations.
class ElboEvaluator {
 public:
  explicit ElboEvaluator(const Graph& g);

  int num_nodes() const { return n_; }
  const Eigen::SparseMatrix<double>& normalized_adjacency() const { return a_hat_; }

  /// ELBO with the reparameterization noise given explicitly: noise[s] is an
  /// n x 2 matrix of standard normals (columns z_r, z_theta). grad may be null.
  /// Throws NumericalError naming the term that went non-finite.
  ElboTerms evaluate(const VariationalState& state, std::span<const Eigen::MatrixXd> noise,
                     ElboGradient* grad) const;

 private:
  int n_;
  Eigen::SparseMatrix<double> a_hat_;
  std::vector<std::uint8_t> adjacency_;
};

/// Draws n_mc noise matrices from rng and evaluates the ELBO.
ElboTerms elbo(const Graph& g, const VariationalState& state, int n_mc, Rng& rng, ElboGradient* grad = nullptr);

/// Closed-form KL of N(mu, sigma^2) to N(0, 1) summed over all entries.
double gaussian_kl(const Eigen::VectorXd& mu, const Eigen::VectorXd& sigma);

/// Starting state: Glorot weights, optionally pretrained toward a spectral
/// layout, and globals matched to the observed density.
VariationalState initial_variational_state(const Graph& g, LatentModel model, const VariationalConfig& config);

/// Adam ascent on the ELBO. Throws NumericalError (with the last ten ELBO
/// values in the message) if the objective becomes NaN.
VariationalState fit_vi(const Graph& g, const VariationalConfig& config = {});
VariationalState fit_vi_euclidean(const Graph& g, const VariationalConfig& config = {});
VariationalState fit_vi(const Graph& g, LatentModel model, const VariationalConfig& config);

/// Continue optimizing an existing state for the given number of epochs.
void train(const Graph& g, VariationalState& state, int epochs);

/// Positions at the variational means and the fitted globals.
LatentConfiguration decoded_configuration(const Graph& g, const VariationalState& state);

/// p_ij at the variational means. Symmetric with zero diagonal.
Eigen::MatrixXd reconstruct_probabilities(const Graph& g, const VariationalState& state);

}  // namespace hcls
