#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "hcls/embedding.hpp"
#include "hcls/errors.hpp"
#include "hcls/generative.hpp"

using namespace hcls;
using doctest::Approx;

namespace {

std::vector<PolarPoint> random_points(int n, Rng& rng) {
  std::vector<PolarPoint> pts;
  for (int i = 0; i < n; ++i) pts.push_back(sample_uniform_disk(6.0, rng));
  return pts;
}

}  // namespace

TEST_CASE("canonical rotation fixes the gauge") {
  Rng rng(1);
  for (int rep = 0; rep < 50; ++rep) {
    const auto pts = random_points(30, rng);
    Eigen::VectorXd w(30);
    for (int i = 0; i < 30; ++i) w(i) = 1.0 + i % 4;
    const auto out = canonical_rotation(pts, w);
    int center = 0;
    for (int i = 1; i < 30; ++i) {
      if (pts[i].r < pts[center].r) center = i;
    }
    CHECK(out[center].theta == 0.0);
    double mass = 0.0;
    for (int i = 0; i < 30; ++i) mass += w(i) * std::sin(out[i].theta);
    CHECK(mass >= 0.0);
    // Applying it twice changes nothing.
    const auto again = canonical_rotation(out, w);
    for (int i = 0; i < 30; ++i) CHECK(again[i].theta == Approx(out[i].theta).epsilon(1e-12));
  }
  CHECK_THROWS_AS(canonical_rotation(random_points(3, rng), Eigen::VectorXd::Ones(2)), ConfigError);
}

TEST_SUITE("properties") {
  TEST_CASE("canonical rotation is an isometry") {
    Rng rng(2);
    for (int rep = 0; rep < 50; ++rep) {
      const auto pts = random_points(25, rng);
      const auto out = canonical_rotation(pts, Eigen::VectorXd::Ones(25));
      for (int i = 0; i < 25; ++i) {
        CHECK(out[i].r == pts[i].r);
        for (int j = i + 1; j < 25; ++j) {
          CHECK(std::abs(hyperbolic_distance_stable(out[i], out[j]) - hyperbolic_distance_stable(pts[i], pts[j])) <
                1e-10);
        }
      }
      std::vector<EuclideanPoint> e;
      for (const auto& p : pts) e.push_back({p.r * std::cos(p.theta), p.r * std::sin(p.theta)});
      const auto eo = canonical_rotation(e, Eigen::VectorXd::Ones(25));
      for (int i = 0; i < 25; ++i) {
        for (int j = i + 1; j < 25; ++j) {
          CHECK(std::abs(euclidean_distance(eo[i], eo[j]) - euclidean_distance(e[i], e[j])) < 1e-10);
        }
      }
    }
  }
}

TEST_CASE("Procrustes recovers a rotation, reflection and translation") {
  Rng rng(3);
  std::normal_distribution<double> z(0.0, 1.0);
  std::vector<EuclideanPoint> ref;
  for (int i = 0; i < 40; ++i) ref.push_back({z(rng), z(rng)});
  for (bool reflect : {false, true}) {
    const double phi = 0.7, c = std::cos(phi), s = std::sin(phi);
    std::vector<EuclideanPoint> moved;
    for (const auto& p : ref) {
      const double y = reflect ? -p.y : p.y;
      moved.push_back({c * p.x - s * y + 3.0, s * p.x + c * y - 1.0});
    }
    const auto aligned = procrustes_align(moved, ref);
    for (int i = 0; i < 40; ++i) {
      CHECK(aligned[i].x == Approx(ref[i].x).epsilon(1e-9));
      CHECK(aligned[i].y == Approx(ref[i].y).epsilon(1e-9));
    }
  }
}

TEST_CASE("Poincare coordinates") {
  CHECK(to_poincare(PolarPoint(0.0, 1.0)).rho == 0.0);
  const PoincarePoint p = to_poincare(PolarPoint(2.0, std::numbers::pi / 2));
  CHECK(p.rho == Approx(std::tanh(1.0)));
  CHECK(p.x() == Approx(0.0).epsilon(1e-12));
  CHECK(p.y() == Approx(std::tanh(1.0)));
  CHECK(to_poincare(PolarPoint(40.0, 0.0)).rho <= 1.0);
}

TEST_CASE("rotation weights and SVG") {
  Graph g(3);
  g.add_edge(0, 1);
  g.add_edge(1, 2);
  const Eigen::VectorXd d = rotation_weights(g, RotationWeights::Degree);
  CHECK(d(1) == 2.0);
  CHECK(rotation_weights(g, RotationWeights::Uniform) == Eigen::VectorXd::Ones(3));
  CHECK(parse_rotation_weights("uniform") == RotationWeights::Uniform);
  CHECK_THROWS(parse_rotation_weights("bogus"));
  Rng rng(4);
  const std::string svg = embedding_svg(g, random_points(3, rng));
  CHECK(svg.starts_with("<svg"));
  CHECK(svg.find("<line") != std::string::npos);
}
