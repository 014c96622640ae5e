#pragma once

// Shared inner loop of the likelihood gradients. Per-node hyperbolic and
// half-angle terms are cached so a pair costs one log1p and two sqrt.

#include <Eigen/Core>

#include <algorithm>
#include <cmath>

#include "hcls/geometry.hpp"

namespace hcls::detail {

struct NodeCache {
  Eigen::ArrayXd sh, ch;            // sinh r, cosh r
  Eigen::ArrayXd sh_half, ch_half;  // sinh r/2, cosh r/2
  Eigen::ArrayXd s_half, c_half;    // sin theta/2, cos theta/2

  void assign(const Eigen::ArrayXd& r, const Eigen::ArrayXd& theta) {
    sh = r.sinh();
    ch = r.cosh();
    sh_half = (0.5 * r).sinh();
    ch_half = (0.5 * r).cosh();
    s_half = (0.5 * theta).sin();
    c_half = (0.5 * theta).cos();
  }
};

struct PairGradient {
  double d;
  double d_ri, d_rj, d_thi;  // d_thj = -d_thi
};

inline PairGradient hyperbolic_pair(const NodeCache& c, Eigen::Index i, Eigen::Index j) {
  // sinh((ri - rj)/2), cosh((ri - rj)/2), sin((ti - tj)/2), cos((ti - tj)/2)
  const double shg = c.sh_half(i) * c.ch_half(j) - c.ch_half(i) * c.sh_half(j);
  const double chg = c.ch_half(i) * c.ch_half(j) - c.sh_half(i) * c.sh_half(j);
  const double sd = c.s_half(i) * c.c_half(j) - c.c_half(i) * c.s_half(j);
  const double cd = c.c_half(i) * c.c_half(j) + c.s_half(i) * c.s_half(j);
  const double s2 = sd * sd;
  const double chord = shg * shg + c.sh(i) * c.sh(j) * s2;
  const double root = std::sqrt(chord) * std::sqrt(chord + 1.0);
  const double scale = 1.0 / std::max(root, kGradientFloor);
  const double gap_term = shg * chg;  // sinh(ri - rj) / 2
  PairGradient g;
  g.d = std::log1p(2.0 * chord + 2.0 * root);
  g.d_ri = scale * (gap_term + c.ch(i) * c.sh(j) * s2);
  g.d_rj = scale * (-gap_term + c.sh(i) * c.ch(j) * s2);
  g.d_thi = scale * c.sh(i) * c.sh(j) * sd * cd;
  return g;
}

inline double hyperbolic_pair_distance(const NodeCache& c, Eigen::Index i, Eigen::Index j) {
  const double shg = c.sh_half(i) * c.ch_half(j) - c.ch_half(i) * c.sh_half(j);
  const double sd = c.s_half(i) * c.c_half(j) - c.c_half(i) * c.s_half(j);
  const double chord = shg * shg + c.sh(i) * c.sh(j) * sd * sd;
  return std::log1p(2.0 * chord + 2.0 * std::sqrt(chord) * std::sqrt(chord + 1.0));
}

// Radius r = arccosh(1 + 2 sinh^2(R/2) u) with u = logistic(s), and its
// derivatives in stable closed form.
struct RadialMap {
  double r;
  double dr_ds;
  double dr_dR;
};

inline RadialMap radial_map(double s, double R) {
  const double u = s >= 0.0 ? 1.0 / (1.0 + std::exp(-s)) : std::exp(s) / (1.0 + std::exp(s));
  const double one_minus_u = s >= 0.0 ? std::exp(-s) / (1.0 + std::exp(-s)) : 1.0 / (1.0 + std::exp(s));
  const double shR = std::sinh(0.5 * R);
  const double x = 2.0 * shR * shR * u;
  RadialMap m;
  m.r = acosh1p(x);
  m.dr_ds = one_minus_u * std::sqrt(x / (x + 2.0));
  m.dr_dR = std::sqrt(2.0) * std::cosh(0.5 * R) * std::sqrt(u) / std::sqrt(x + 2.0);
  return m;
}

}  // namespace hcls::detail
