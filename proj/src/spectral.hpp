#pragma once

// Warm start shared by the samplers: angles from the two leading nontrivial
// eigenvectors of the regularized normalized adjacency, radial quantiles from
// degree rank (highest degree closest to the origin).

#include <Eigen/Core>

#include "hcls/graph.hpp"

namespace hcls::detail {

struct SpectralLayout {
  Eigen::VectorXd angle;     // in (-pi, pi]
  Eigen::VectorXd quantile;  // disk radial quantile u_i in (0, 1)
};

SpectralLayout spectral_layout(const Graph& g);

}  // namespace hcls::detail
