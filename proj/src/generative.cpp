#include "hcls/generative.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "hcls/errors.hpp"

namespace hcls {

std::string_view to_string(Geometry g) {
  switch (g) {
    case Geometry::Hyperbolic: return "hyperbolic";
    case Geometry::Euclidean: return "euclidean";
    case Geometry::Spherical: return "spherical";
  }
  return "unknown";
}

Geometry parse_geometry(std::string_view name) {
  if (name == "hyperbolic") return Geometry::Hyperbolic;
  if (name == "euclidean") return Geometry::Euclidean;
  if (name == "spherical") return Geometry::Spherical;
  throw ConfigError("unknown geometry '" + std::string(name) + "'");
}

void ModelParams::validate() const {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("ModelParams: R must be positive");
  if (!(T > 0.0 && T <= 0.5)) throw DomainError("ModelParams: T must lie in (0, 0.5]");
  if (!std::isfinite(alpha)) throw DomainError("ModelParams: alpha must be finite");
}

int LatentConfiguration::size() const {
  return std::visit([](const auto& v) { return static_cast<int>(v.size()); }, positions);
}

double LatentConfiguration::distance(int i, int j) const {
  const auto a = static_cast<std::size_t>(i);
  const auto b = static_cast<std::size_t>(j);
  switch (geometry()) {
    case Geometry::Hyperbolic: {
      const auto& p = std::get<0>(positions);
      return hyperbolic_distance_stable(p[a], p[b]);
    }
    case Geometry::Euclidean: {
      const auto& p = std::get<1>(positions);
      return euclidean_distance(p[a], p[b]);
    }
    case Geometry::Spherical: {
      const auto& p = std::get<2>(positions);
      return params.R * sphere_distance(p[a], p[b]);
    }
  }
  return 0.0;
}

Eigen::MatrixXd LatentConfiguration::distance_matrix() const {
  const int n = size();
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      d(i, j) = distance(i, j);
      d(j, i) = d(i, j);
    }
  }
  return d;
}

double link_probability(double d, const ModelParams& params) {
  if (!(params.T > 0.0)) throw DomainError("link_probability: T must be positive");
  return logistic((params.alpha - d) / (2.0 * params.T));
}

double link_probability(double d, const ModelParams& params, LinkFunction link) {
  switch (link) {
    case LinkFunction::FermiDirac: return link_probability(d, params);
    case LinkFunction::TwoLogistic: return 2.0 * logistic(-d);
    case LinkFunction::Exponential: return std::exp(-d);
  }
  return 0.0;
}

LatentConfiguration sample_positions(Geometry geometry, int n, const ModelParams& params, Rng& rng) {
  if (n < 2) throw DomainError("sample_positions: need at least 2 nodes");
  params.validate();
  LatentConfiguration config;
  config.params = params;
  const auto count = static_cast<std::size_t>(n);
  switch (geometry) {
    case Geometry::Hyperbolic: {
      std::vector<PolarPoint> pts;
      pts.reserve(count);
      for (int i = 0; i < n; ++i) pts.push_back(sample_uniform_disk(params.R, rng));
      config.positions = std::move(pts);
      break;
    }
    case Geometry::Euclidean: {
      config.tau = matched_spread(params.R);
      std::vector<EuclideanPoint> pts;
      pts.reserve(count);
      for (int i = 0; i < n; ++i) pts.push_back(sample_gaussian_plane(config.tau, rng));
      config.positions = std::move(pts);
      break;
    }
    case Geometry::Spherical: {
      std::vector<SpherePoint> pts;
      pts.reserve(count);
      for (int i = 0; i < n; ++i) pts.push_back(sample_uniform_sphere(rng));
      config.positions = std::move(pts);
      break;
    }
  }
  return config;
}

Graph generate_graph_keyed(const LatentConfiguration& config, std::uint64_t key) {
  const int n = config.size();
  Graph g(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double p = link_probability(config.distance(i, j), config.params, config.link);
      const auto counter = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(n) + static_cast<std::uint64_t>(j);
      if (counter_uniform(key, counter) < p) g.add_edge(i, j);
    }
  }
  return g;
}

Graph generate_graph(const LatentConfiguration& config, Rng& rng) { return generate_graph_keyed(config, rng()); }

double expected_density(const LatentConfiguration& config) {
  const int n = config.size();
  if (n < 2) return 0.0;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) total += link_probability(config.distance(i, j), config.params, config.link);
  }
  return total / (0.5 * n * (n - 1.0));
}

double calibrate_alpha_for_density(Geometry geometry, int n, double R, double T, double target_density, Rng& rng,
                                   const CalibrationOptions& options) {
  if (!(target_density > 0.0 && target_density < 1.0)) {
    throw DomainError("calibrate_alpha_for_density: target density must lie in (0, 1)");
  }
  if (geometry == Geometry::Spherical) throw ConfigError("calibrate_alpha_for_density: spherical geometry unsupported");
  if (options.replicates < 1) throw ConfigError("calibrate_alpha_for_density: need at least one replicate");

  const ModelParams probe{R, R, T};
  probe.validate();

  // Common position draws for every alpha keep the density monotone in alpha.
  std::vector<double> distances;
  distances.reserve(static_cast<std::size_t>(options.replicates) * static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (int rep = 0; rep < options.replicates; ++rep) {
    const LatentConfiguration config = sample_positions(geometry, n, probe, rng);
    for (int i = 0; i < n; ++i) {
      for (int j = i + 1; j < n; ++j) distances.push_back(config.distance(i, j));
    }
  }
  auto density_at = [&](double alpha) {
    const double inv = 1.0 / (2.0 * T);
    double total = 0.0;
    for (double d : distances) total += logistic((alpha - d) * inv);
    return total / static_cast<double>(distances.size());
  };

  double lo = -10.0 * R;
  double hi = 10.0 * R;
  const double tol = options.relative_tolerance * target_density;
  auto within = [&](double dens) { return std::abs(dens - target_density) <= tol; };

  const double dens_lo = density_at(lo);
  const double dens_hi = density_at(hi);
  if (dens_lo > target_density + tol || dens_hi < target_density - tol) {
    throw CalibrationError("calibrate_alpha_for_density: target " + std::to_string(target_density) +
                           " outside reachable range [" + std::to_string(dens_lo) + ", " + std::to_string(dens_hi) + "]");
  }

  double best_alpha = 0.5 * (lo + hi);
  double best_err = std::abs(density_at(best_alpha) - target_density);
  for (int iter = 0; iter < 200; ++iter) {
    const double mid = 0.5 * (lo + hi);
    const double dens = density_at(mid);
    const double err = std::abs(dens - target_density);
    if (err < best_err) {
      best_err = err;
      best_alpha = mid;
    }
    if (err <= 1e-3 * target_density || hi - lo < 1e-12 * std::max(1.0, std::abs(mid))) break;
    if (dens < target_density) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  if (!within(density_at(best_alpha))) {
    throw CalibrationError("calibrate_alpha_for_density: bisection stalled at relative error " +
                           std::to_string(best_err / target_density));
  }
  return best_alpha;
}

double density_matched_radius(double density, double T, Rng& rng, int pairs) {
  if (pairs < 1) throw ConfigError("density_matched_radius: need at least one pair");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<double> u1(static_cast<std::size_t>(pairs)), u2(u1.size()), dtheta(u1.size());
  for (std::size_t k = 0; k < u1.size(); ++k) {
    u1[k] = unit(rng);
    u2[k] = unit(rng);
    dtheta[k] = unit(rng) * kTwoPi;
  }
  const auto density_at = [&](double R) {
    const ModelParams params{R, R, T};
    double total = 0.0;
    for (std::size_t k = 0; k < u1.size(); ++k) {
      const PolarPoint a(disk_radius_from_quantile(u1[k], R), 0.0);
      const PolarPoint b(disk_radius_from_quantile(u2[k], R), dtheta[k]);
      total += link_probability(hyperbolic_distance_stable(a, b), params);
    }
    return total / static_cast<double>(u1.size());
  };
  // Density at alpha = R decreases with R.
  double lo = std::log(0.5), hi = std::log(40.0);
  const double target = std::clamp(density, 1e-4, 0.999);
  for (int iter = 0; iter < 50; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (density_at(std::exp(mid)) > target) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return std::exp(0.5 * (lo + hi));
}

}  // namespace hcls
