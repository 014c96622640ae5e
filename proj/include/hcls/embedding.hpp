#pragma once

// Canonical orientation of fitted embeddings. Latent positions are only
// identified up to isometry, so exports fix the gauge: the most central node
// goes to angle zero, then the layout is reflected if needed so the weighted
// angular mass sum_i w_i sin(theta_i) is nonnegative.

#include <Eigen/Core>

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "hcls/geometry.hpp"
#include "hcls/graph.hpp"

namespace hcls {

enum class RotationWeights { Degree, Uniform };

RotationWeights parse_rotation_weights(std::string_view name);

/// Per-node weights for the reflection test.
Eigen::VectorXd rotation_weights(const Graph& g, RotationWeights kind);

/// Rotates so the minimum-radius node (lowest id on ties) sits at theta = 0,
/// then reflects theta -> -theta when the weighted angular mass is negative.
std::vector<PolarPoint> canonical_rotation(std::span<const PolarPoint> points, const Eigen::VectorXd& weights);

/// Same gauge for planar points: translate the centroid to the origin, rotate
/// the node nearest the centroid onto the positive x axis, reflect across it
/// if sum_i w_i y_i < 0.
std::vector<EuclideanPoint> canonical_rotation(std::span<const EuclideanPoint> points, const Eigen::VectorXd& weights);

/// Orthogonal Procrustes: the rotation or reflection (plus translation) of
/// points that best matches reference in least squares.
std::vector<EuclideanPoint> procrustes_align(std::span<const EuclideanPoint> points,
                                             std::span<const EuclideanPoint> reference);

struct PoincarePoint {
  double rho = 0.0;  ///< tanh(r / 2), in [0, 1)
  double theta = 0.0;
  double x() const;
  double y() const;
};

PoincarePoint to_poincare(const PolarPoint& p);

/// Scatter plot with edges drawn as straight segments. Hyperbolic points are
/// drawn in the Poincare disk.
std::string embedding_svg(const Graph& g, std::span<const PolarPoint> points);
std::string embedding_svg(const Graph& g, std::span<const EuclideanPoint> points);

}  // namespace hcls
