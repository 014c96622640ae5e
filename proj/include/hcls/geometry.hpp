#pragma once

// Latent geometries: native-polar hyperbolic plane (curvature -1), the
// Euclidean plane and the unit sphere. Distance kernels are templated on the
// scalar type so they can be evaluated in extended precision.

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>

#include "hcls/errors.hpp"
#include "hcls/random.hpp"

namespace hcls {

/// Sectional curvature of the hyperbolic latent space. Fixed, never estimated.
inline constexpr double kCurvature = -1.0;

inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Clamp applied to the arccosh-derivative denominator near coincident points.
inline constexpr double kGradientFloor = 1e-12;

/// Map an angle to [0, 2pi).
template <typename Scalar>
Scalar wrap_angle(Scalar theta) {
  using std::floor;
  const Scalar two_pi = Scalar(2) * Scalar(std::numbers::pi);
  Scalar wrapped = theta - two_pi * floor(theta / two_pi);
  if (wrapped >= two_pi) wrapped -= two_pi;
  if (wrapped < Scalar(0)) wrapped = Scalar(0);
  return wrapped;
}

/// arccosh(1 + x) for x >= 0, accurate for tiny x.
template <typename Scalar>
Scalar acosh1p(Scalar x) {
  using std::log1p;
  using std::sqrt;
  // The product under the root overflows long before x does.
  if (x > Scalar(1e150)) return log1p(x + sqrt(x) * sqrt(x + Scalar(2)));
  return log1p(x + sqrt(x * (x + Scalar(2))));
}

/// Point of the hyperbolic plane in native polar coordinates: r is the
/// geodesic distance from the origin.
template <typename Scalar>
struct BasicPolarPoint {
  Scalar r{0};
  Scalar theta{0};

  BasicPolarPoint() = default;
  BasicPolarPoint(Scalar radius, Scalar angle) : r(radius), theta(wrap_angle(angle)) {
    if (!(radius >= Scalar(0))) throw DomainError("PolarPoint: radius must be nonnegative");
  }

  friend bool operator==(const BasicPolarPoint&, const BasicPolarPoint&) = default;
};

template <typename Scalar>
struct BasicEuclideanPoint {
  Scalar x{0};
  Scalar y{0};

  friend bool operator==(const BasicEuclideanPoint&, const BasicEuclideanPoint&) = default;
};

/// Unit vector on S^2.
template <typename Scalar>
class BasicSpherePoint {
 public:
  using Vector = Eigen::Matrix<Scalar, 3, 1>;

  BasicSpherePoint() : v_(Scalar(0), Scalar(0), Scalar(1)) {}
  explicit BasicSpherePoint(const Vector& v) {
    const Scalar norm = v.norm();
    if (!(norm > Scalar(0))) throw DomainError("SpherePoint: zero vector");
    v_ = v / norm;
  }

  const Vector& vec() const { return v_; }

 private:
  Vector v_;
};

using PolarPoint = BasicPolarPoint<double>;
using EuclideanPoint = BasicEuclideanPoint<double>;
using SpherePoint = BasicSpherePoint<double>;

// Low-order part of 2pi, so (kTwoPi - x) + kTwoPiLo is 2pi - x to full precision.
inline constexpr double kTwoPiLo = 2.4492935982947064e-16;

/// Angular separation min(|t1 - t2|, 2pi - |t1 - t2|), in [0, pi]. Small
/// separations are returned exactly.
template <typename Scalar>
Scalar angular_separation(Scalar theta1, Scalar theta2) {
  using std::abs;
  const Scalar d = abs(wrap_angle(theta1) - wrap_angle(theta2));
  if (d <= Scalar(std::numbers::pi)) return d;
  // Exact subtraction for d in [pi, 2pi].
  return (Scalar(kTwoPi) - d) + Scalar(kTwoPiLo);
}

/// Textbook law-of-cosines distance. Loses precision for nearby points and
/// overflows for r beyond ~350; use hyperbolic_distance_stable in inference.
template <typename Scalar>
Scalar hyperbolic_distance(const BasicPolarPoint<Scalar>& a, const BasicPolarPoint<Scalar>& b) {
  using std::acosh;
  using std::cos;
  using std::cosh;
  using std::sinh;
  const Scalar dtheta = angular_separation(a.theta, b.theta);
  if (a.r == b.r && dtheta == Scalar(0)) return Scalar(0);
  const Scalar arg = cosh(a.r) * cosh(b.r) - sinh(a.r) * sinh(b.r) * cos(dtheta);
  return acosh(arg < Scalar(1) ? Scalar(1) : arg);
}

namespace detail {

// log(sinh x) for x >= 0.
template <typename Scalar>
Scalar log_sinh(Scalar x) {
  using std::exp;
  using std::log;
  using std::log1p;
  using std::sinh;
  if (x <= Scalar(0)) return -std::numeric_limits<Scalar>::infinity();
  if (x < Scalar(20)) return log(sinh(x));
  return x + log1p(-exp(Scalar(-2) * x)) - log(Scalar(2));
}

template <typename Scalar>
Scalar log_add_exp(Scalar a, Scalar b) {
  using std::exp;
  using std::log1p;
  if (a < b) std::swap(a, b);
  if (b == -std::numeric_limits<Scalar>::infinity()) return a;
  return a + log1p(exp(b - a));
}

// Radius above which sinh(r1) * sinh(r2) is computed in log space.
inline constexpr double kLogSpaceRadius = 300.0;

}  // namespace detail

/// Overflow-free distance arccosh(1 + 2(sinh^2((r1-r2)/2) + sinh r1 sinh r2 sin^2(dtheta/2))).
/// Finite for radii up to at least 700.
template <typename Scalar>
Scalar hyperbolic_distance_stable(const BasicPolarPoint<Scalar>& a, const BasicPolarPoint<Scalar>& b) {
  using std::abs;
  using std::exp;
  using std::log;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  const Scalar half_gap = (a.r - b.r) / Scalar(2);
  const Scalar half_sep = sin(angular_separation(a.theta, b.theta) / Scalar(2));
  if (a.r < Scalar(detail::kLogSpaceRadius) && b.r < Scalar(detail::kLogSpaceRadius)) {
    const Scalar sh = sinh(half_gap);
    const Scalar chord = sh * sh + sinh(a.r) * sinh(b.r) * half_sep * half_sep;
    return acosh1p(Scalar(2) * chord);
  }
  const Scalar log_chord =
      detail::log_add_exp(Scalar(2) * detail::log_sinh(abs(half_gap)),
                          detail::log_sinh(a.r) + detail::log_sinh(b.r) + Scalar(2) * log(abs(half_sep)));
  // arccosh(1 + 2A) = log A + log(2 + 1/A + 2 sqrt(1 + 1/A)); A is huge here.
  const Scalar inv = exp(-log_chord);
  return log_chord + log(Scalar(2) + inv + Scalar(2) * sqrt(Scalar(1) + inv));
}

/// Partial derivatives of the hyperbolic distance w.r.t. both endpoints.
/// Angle derivatives are taken with respect to the unwrapped angles.
template <typename Scalar>
struct BasicDistanceGradient {
  Scalar distance{0};
  Scalar d_r1{0};
  Scalar d_theta1{0};
  Scalar d_r2{0};
  Scalar d_theta2{0};
};

using DistanceGradient = BasicDistanceGradient<double>;

/// Distance and gradient with the denominator of d arccosh clamped at
/// kGradientFloor, so coincident points yield a zero (finite) gradient.
/// Intended for radii below ~300.
template <typename Scalar>
BasicDistanceGradient<Scalar> hyperbolic_distance_grad_clamped(Scalar r1, Scalar theta1, Scalar r2,
                                                               Scalar theta2) {
  using std::cosh;
  using std::max;
  using std::sin;
  using std::sinh;
  using std::sqrt;
  const Scalar gap = r1 - r2;
  const Scalar sh_half = sinh(gap / Scalar(2));
  const Scalar delta = theta1 - theta2;
  const Scalar s_half = sin(delta / Scalar(2));
  const Scalar sh1 = sinh(r1);
  const Scalar sh2 = sinh(r2);
  const Scalar chord = sh_half * sh_half + sh1 * sh2 * s_half * s_half;

  BasicDistanceGradient<Scalar> g;
  g.distance = acosh1p(Scalar(2) * chord);
  // d/dA arccosh(1 + 2A) = 1 / sqrt(A (A + 1))
  const Scalar scale = Scalar(1) / max(sqrt(chord) * sqrt(chord + Scalar(1)), Scalar(kGradientFloor));
  const Scalar gap_term = sinh(gap) / Scalar(2);
  const Scalar s2 = s_half * s_half;
  g.d_r1 = scale * (gap_term + cosh(r1) * sh2 * s2);
  g.d_r2 = scale * (-gap_term + sh1 * cosh(r2) * s2);
  const Scalar angle_term = sh1 * sh2 * sin(delta) / Scalar(2);
  g.d_theta1 = scale * angle_term;
  g.d_theta2 = -g.d_theta1;
  return g;
}

/// Analytic gradient of hyperbolic_distance_stable. Throws DomainError for
/// coincident points, where the derivative of arccosh is singular.
template <typename Scalar>
BasicDistanceGradient<Scalar> hyperbolic_distance_grad(const BasicPolarPoint<Scalar>& a,
                                                       const BasicPolarPoint<Scalar>& b) {
  if (a.r == b.r && angular_separation(a.theta, b.theta) == Scalar(0)) {
    throw DomainError("hyperbolic_distance_grad: gradient singular at coincident points");
  }
  return hyperbolic_distance_grad_clamped(a.r, a.theta, b.r, b.theta);
}

template <typename Scalar>
Scalar euclidean_distance(const BasicEuclideanPoint<Scalar>& a, const BasicEuclideanPoint<Scalar>& b) {
  using std::hypot;
  return hypot(a.x - b.x, a.y - b.y);
}

/// Great-circle angle in [0, pi]; atan2 form keeps full precision near 0 and pi.
template <typename Scalar>
Scalar sphere_distance(const BasicSpherePoint<Scalar>& a, const BasicSpherePoint<Scalar>& b) {
  using std::atan2;
  const Scalar cross = a.vec().cross(b.vec()).norm();
  Scalar dot = a.vec().dot(b.vec());
  dot = std::clamp(dot, Scalar(-1), Scalar(1));
  return atan2(cross, dot);
}

/// Inverse radial CDF of the uniform hyperbolic disk of radius R.
inline double disk_radius_from_quantile(double u, double R) {
  const double sh = std::sinh(0.5 * R);
  return acosh1p(2.0 * sh * sh * u);
}

/// Radial CDF F(r) = (cosh r - 1) / (cosh R - 1) of the uniform hyperbolic disk.
inline double disk_radius_cdf(double r, double R) {
  if (r <= 0.0) return 0.0;
  if (r >= R) return 1.0;
  const double num = std::sinh(0.5 * r);
  const double den = std::sinh(0.5 * R);
  return (num * num) / (den * den);
}

/// Uniform point on the hyperbolic disk of radius R centered at the origin.
template <class URBG>
PolarPoint sample_uniform_disk(double R, URBG& rng) {
  if (!(R > 0.0) || !std::isfinite(R)) throw DomainError("sample_uniform_disk: R must be positive");
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  const double theta = unit(rng) * kTwoPi;
  return PolarPoint(disk_radius_from_quantile(u, R), theta);
}

/// N(0, tau^2 I_2) point.
template <class URBG>
EuclideanPoint sample_gaussian_plane(double tau, URBG& rng) {
  if (!(tau > 0.0)) throw DomainError("sample_gaussian_plane: tau must be positive");
  std::normal_distribution<double> normal(0.0, tau);
  const double x = normal(rng);
  const double y = normal(rng);
  return {x, y};
}

/// Uniform point on S^2 via a normalized standard Gaussian 3-vector.
template <class URBG>
SpherePoint sample_uniform_sphere(URBG& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  for (;;) {
    Eigen::Vector3d v;
    v.x() = normal(rng);
    v.y() = normal(rng);
    v.z() = normal(rng);
    if (v.squaredNorm() > 1e-24) return SpherePoint(v);
  }
}

}  // namespace hcls
