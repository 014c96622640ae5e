#pragma once

// Forward simulation of continuous latent space networks.

#include <Eigen/Core>

#include <cstdint>
#include <string_view>
#include <variant>
#include <vector>

#include "hcls/geometry.hpp"
#include "hcls/graph.hpp"
#include "hcls/random.hpp"

namespace hcls {

enum class Geometry { Hyperbolic, Euclidean, Spherical };

std::string_view to_string(Geometry g);
Geometry parse_geometry(std::string_view name);

/// Distance-to-probability map used by the generator. Only FermiDirac is an
/// inference target; the other two exist to reproduce probability histograms.
enum class LinkFunction {
  FermiDirac,   ///< 1 / (1 + exp((d - alpha) / 2T))
  TwoLogistic,  ///< 2 logistic(-d)
  Exponential,  ///< exp(-d)
};

/// Global parameters: disk radius R, threshold alpha, temperature T.
struct ModelParams {
  double R = 5.0;
  double alpha = 5.0;
  double T = 0.01;

  /// Throws DomainError unless R > 0, T in (0, 0.5] and alpha finite.
  void validate() const;
};

/// Ratio R / tau that places 95% of N(0, tau^2 I_2) mass inside radius R
/// (sqrt of the chi-square(2) 0.95 quantile, rounded as 2.448).
inline constexpr double kSpreadRatio = 2.448;

inline double matched_spread(double R) { return R / kSpreadRatio; }

using Positions =
    std::variant<std::vector<PolarPoint>, std::vector<EuclideanPoint>, std::vector<SpherePoint>>;

/// Latent positions together with the parameters that generate edges.
/// Spherical positions live on a sphere of radius R.
struct LatentConfiguration {
  Positions positions;
  ModelParams params;
  double tau = 0.0;  ///< Gaussian spread, meaningful only for Euclidean
  LinkFunction link = LinkFunction::FermiDirac;

  Geometry geometry() const { return static_cast<Geometry>(positions.index()); }
  int size() const;
  double distance(int i, int j) const;
  Eigen::MatrixXd distance_matrix() const;
};

/// Fermi-Dirac link evaluated through the log-odds (alpha - d) / 2T.
double link_probability(double d, const ModelParams& params);
double link_probability(double d, const ModelParams& params, LinkFunction link);

/// Numerically stable logistic function.
inline double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

/// n i.i.d. prior draws; Euclidean spread fixed to R / 2.448.
LatentConfiguration sample_positions(Geometry geometry, int n, const ModelParams& params, Rng& rng);

/// Independent Bernoulli edge per pair. Pair (i, j) uses its own counter
/// stream keyed by a single draw from rng, so the result does not depend on
/// evaluation order.
Graph generate_graph(const LatentConfiguration& config, Rng& rng);

/// Same, with the stream key given explicitly.
Graph generate_graph_keyed(const LatentConfiguration& config, std::uint64_t key);

/// Mean edge probability over all unordered pairs.
double expected_density(const LatentConfiguration& config);

struct CalibrationOptions {
  int replicates = 20;
  double relative_tolerance = 0.05;
};

/// Bisection for alpha in [-10R, 10R] such that the Monte Carlo expected
/// density over fresh position draws matches target_density. Hyperbolic and
/// Euclidean only. Throws CalibrationError when the bracket cannot reach it.
double calibrate_alpha_for_density(Geometry geometry, int n, double R, double T, double target_density,
                                   Rng& rng, const CalibrationOptions& options = {});

/// Radius R of a uniform hyperbolic disk whose expected edge density at
/// alpha = R matches the given density, by bisection on log R in [log 0.5,
/// log 40] over a fixed set of random pairs.
double density_matched_radius(double density, double T, Rng& rng, int pairs = 4000);

}  // namespace hcls
