#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hcls/geometry.hpp"
#include "oracles.hpp"

using namespace hcls;
using doctest::Approx;

namespace {

constexpr double kPi = std::numbers::pi;

PolarPoint random_point(Rng& rng, double r_max) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return PolarPoint(r_max * u(rng), kTwoPi * u(rng));
}

double rel_err(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("wrap_angle and angular separation") {
  CHECK(wrap_angle(2 * kPi + 0.3) == Approx(0.3).epsilon(1e-14));
  CHECK(wrap_angle(-0.5) == Approx(2 * kPi - 0.5));
  CHECK(wrap_angle(2 * kPi) == 0.0);
  CHECK(angular_separation(0.1, 2 * kPi - 0.1) == Approx(0.2));
  CHECK(angular_separation(0.0, kPi) == Approx(kPi));
  CHECK(PolarPoint(1.0, -kPi / 2).theta == Approx(1.5 * kPi));
  CHECK_THROWS_AS(PolarPoint(-1.0, 0.0), DomainError);
}

TEST_CASE("acosh1p is accurate near zero") {
  for (double x : {1e-30, 1e-16, 1e-8, 1e-3, 1.0, 1e6}) {
    const double want = static_cast<double>(boost::multiprecision::acosh(oracle::Big(1) + oracle::Big(x)));
    CHECK(rel_err(acosh1p(x), want) < 1e-14);
  }
}

TEST_CASE("hyperbolic distance special cases") {
  const PolarPoint a(2.0, 1.0);
  CHECK(hyperbolic_distance(a, a) == 0.0);
  CHECK(hyperbolic_distance_stable(a, a) == 0.0);
  // Same ray: |r1 - r2|.
  CHECK(hyperbolic_distance_stable(PolarPoint(3.0, 0.7), PolarPoint(1.25, 0.7)) == Approx(1.75).epsilon(1e-13));
  // Opposite rays: r1 + r2.
  CHECK(hyperbolic_distance(PolarPoint(1.0, 0.0), PolarPoint(2.0, kPi)) == Approx(3.0).epsilon(1e-12));
  CHECK(std::abs(hyperbolic_distance_stable(PolarPoint(20.0, 0.0), PolarPoint(20.0, kPi)) - 40.0) < 1e-8);
  // Origin: distance is the radius.
  CHECK(hyperbolic_distance_stable(PolarPoint(0.0, 0.0), PolarPoint(4.2, 2.0)) == Approx(4.2).epsilon(1e-13));
}

TEST_CASE("stable distance stays finite and monotone up to r = 700") {
  double prev = 0.0;
  for (double r = 10.0; r <= 700.0; r += 10.0) {
    const double d = hyperbolic_distance_stable(PolarPoint(r, 0.0), PolarPoint(r, 1.0));
    REQUIRE(std::isfinite(d));
    CHECK(d > prev);
    prev = d;
  }
  // Far apart on large radii the distance approaches r1 + r2 + 2 log sin(dtheta/2).
  const double d = hyperbolic_distance_stable(PolarPoint(500.0, 0.0), PolarPoint(600.0, 2.0));
  CHECK(d == Approx(1100.0 + 2.0 * std::log(std::sin(1.0))).epsilon(1e-12));
}

TEST_CASE("log-space branch agrees with the direct branch at the switch radius") {
  Rng rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 200; ++k) {
    const double r1 = 299.0 + 2.0 * u(rng), r2 = 250.0 + 60.0 * u(rng);
    const double t1 = kTwoPi * u(rng), t2 = kTwoPi * u(rng);
    const double want = oracle::hyperbolic_distance(r1, t1, r2, t2);
    CHECK(rel_err(hyperbolic_distance_stable(PolarPoint(r1, t1), PolarPoint(r2, t2)), want) < 1e-12);
  }
}

TEST_SUITE("properties") {
  TEST_CASE("stable distance matches the extended-precision law of cosines to 1e-10") {
    Rng rng(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int k = 0; k < 3000; ++k) {
      const double r_max = k < 1000 ? 10.0 : 30.0;
      const PolarPoint a = random_point(rng, r_max);
      // A third of the pairs are near-coincident, where cancellation bites.
      PolarPoint b = random_point(rng, r_max);
      if (k % 3 == 0) b = PolarPoint(a.r + 1e-7 * (u(rng) - 0.5), a.theta + 1e-7 * u(rng));
      const double want = oracle::hyperbolic_distance(a.r, a.theta, b.r, b.theta);
      if (want == 0.0) continue;
      worst = std::max(worst, rel_err(hyperbolic_distance_stable(a, b), want));
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("naive double-precision distance agrees with stable form away from cancellation") {
    Rng rng(12);
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      const PolarPoint a = random_point(rng, 10.0), b = random_point(rng, 10.0);
      const double d = hyperbolic_distance_stable(a, b);
      if (d < 1.0) continue;
      worst = std::max(worst, rel_err(hyperbolic_distance(a, b), d));
    }
    CHECK(worst < 1e-10);
  }

  TEST_CASE("disk sampler radial and angular laws pass KS at 0.001") {
    Rng rng(2024);
    const double R = 5.0;
    const std::size_t n = 100000;
    std::vector<double> rs, ts;
    for (std::size_t k = 0; k < n; ++k) {
      const PolarPoint p = sample_uniform_disk(R, rng);
      REQUIRE(p.r <= R);
      rs.push_back(p.r);
      ts.push_back(p.theta);
    }
    const double d_r = oracle::ks_statistic(rs, [&](double r) {
      return (std::cosh(r) - 1.0) / (std::cosh(R) - 1.0);
    });
    const double d_t = oracle::ks_statistic(ts, [](double t) { return t / kTwoPi; });
    CHECK(d_r < 0.01);
    CHECK(d_r < oracle::ks_critical(0.001, n));
    CHECK(d_t < oracle::ks_critical(0.001, n));
  }

  TEST_CASE("distance gradient matches central differences") {
    Rng rng(5);
    const double h = 1e-6;
    int checked = 0;
    for (int k = 0; k < 100; ++k) {
      const PolarPoint a = random_point(rng, 8.0), b = random_point(rng, 8.0);
      if (hyperbolic_distance_stable(a, b) < 1e-3) continue;
      const DistanceGradient g = hyperbolic_distance_grad(a, b);
      const auto d = [](double r1, double t1, double r2, double t2) {
        return hyperbolic_distance_stable(PolarPoint(r1, t1), PolarPoint(r2, t2));
      };
      // Angles are differentiated unwrapped; stay away from r = 0 for the radial step.
      const double fd_r1 = (d(a.r + h, a.theta, b.r, b.theta) - d(a.r - h, a.theta, b.r, b.theta)) / (2 * h);
      const double fd_t1 = (d(a.r, a.theta + h, b.r, b.theta) - d(a.r, a.theta - h, b.r, b.theta)) / (2 * h);
      const double fd_r2 = (d(a.r, a.theta, b.r + h, b.theta) - d(a.r, a.theta, b.r - h, b.theta)) / (2 * h);
      const double fd_t2 = (d(a.r, a.theta, b.r, b.theta + h) - d(a.r, a.theta, b.r, b.theta - h)) / (2 * h);
      if (a.r < 2 * h || b.r < 2 * h) continue;
      for (auto [an, fd] : {std::pair{g.d_r1, fd_r1}, {g.d_theta1, fd_t1}, {g.d_r2, fd_r2}, {g.d_theta2, fd_t2}}) {
        CHECK(std::abs(an - fd) <= 1e-5 * std::max(1.0, std::abs(fd)));
      }
      ++checked;
    }
    CHECK(checked > 90);
  }
}

TEST_CASE("gradient special cases") {
  const DistanceGradient g = hyperbolic_distance_grad(PolarPoint(3.0, 1.0), PolarPoint(1.0, 1.0));
  CHECK(g.d_r1 == Approx(1.0));
  CHECK(g.d_r2 == Approx(-1.0));
  CHECK(g.d_theta1 == Approx(0.0));

  const PolarPoint a(2.0, 0.4), b(1.5, 2.9);
  const DistanceGradient ab = hyperbolic_distance_grad(a, b), ba = hyperbolic_distance_grad(b, a);
  CHECK(ab.d_r1 == Approx(ba.d_r2));
  CHECK(ab.d_theta1 == Approx(ba.d_theta2));

  CHECK_THROWS_AS(hyperbolic_distance_grad(a, a), DomainError);
  const DistanceGradient clamped = hyperbolic_distance_grad_clamped(2.0, 0.4, 2.0, 0.4);
  CHECK(std::isfinite(clamped.d_r1));
  CHECK(clamped.d_theta1 == 0.0);
}

TEST_CASE("symmetry, identity and triangle inequality on random triples") {
  Rng rng(8);
  for (int k = 0; k < 1000; ++k) {
    const PolarPoint a = random_point(rng, 12.0), b = random_point(rng, 12.0), c = random_point(rng, 12.0);
    const double ab = hyperbolic_distance_stable(a, b), ba = hyperbolic_distance_stable(b, a);
    CHECK(ab == ba);
    CHECK(ab > 0.0);
    CHECK(ab <= hyperbolic_distance_stable(a, c) + hyperbolic_distance_stable(c, b) + 1e-9);
  }
}

TEST_CASE("Euclidean and spherical distances") {
  CHECK(euclidean_distance(EuclideanPoint{0, 0}, EuclideanPoint{3, 4}) == 5.0);
  CHECK(euclidean_distance(EuclideanPoint{1, 2}, EuclideanPoint{1, 2}) == 0.0);
  Rng rng(9);
  std::normal_distribution<double> z(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const EuclideanPoint a{z(rng), z(rng)}, b{z(rng), z(rng)}, c{z(rng), z(rng)};
    CHECK(euclidean_distance(a, b) <= euclidean_distance(a, c) + euclidean_distance(c, b) + 1e-12);
  }
  const SpherePoint x(Eigen::Vector3d(1, 0, 0)), y(Eigen::Vector3d(0, 1, 0)), mx(Eigen::Vector3d(-1, 0, 0));
  CHECK(sphere_distance(x, x) == 0.0);
  CHECK(sphere_distance(x, mx) == Approx(kPi));
  CHECK(sphere_distance(x, y) == Approx(kPi / 2));
  for (int k = 0; k < 100; ++k) CHECK(sample_uniform_sphere(rng).vec().norm() == Approx(1.0).epsilon(1e-12));
}

TEST_CASE("disk quantile endpoints and domain errors") {
  CHECK(disk_radius_from_quantile(0.0, 5.0) == 0.0);
  CHECK(disk_radius_from_quantile(1.0, 5.0) == Approx(5.0).epsilon(1e-13));
  CHECK(disk_radius_cdf(disk_radius_from_quantile(0.3, 7.0), 7.0) == Approx(0.3).epsilon(1e-12));
  Rng rng(1);
  CHECK_THROWS_AS(sample_uniform_disk(0.0, rng), DomainError);
  CHECK_THROWS_AS(sample_uniform_disk(-1.0, rng), DomainError);
}
