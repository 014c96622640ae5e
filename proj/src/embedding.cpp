#include "hcls/embedding.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hcls/errors.hpp"

namespace hcls {
namespace {

constexpr double kCanvas = 600.0;

template <class Point>
void check_weights(std::span<const Point> points, const Eigen::VectorXd& weights) {
  if (weights.size() != static_cast<Eigen::Index>(points.size())) {
    throw ConfigError("canonical_rotation: one weight per point required");
  }
}

std::string svg(const Graph& g, const std::vector<Eigen::Vector2d>& xy, bool disk) {
  std::ostringstream out;
  out.precision(6);
  const double half = kCanvas / 2.0;
  double extent = 1.0;
  if (!disk) {
    extent = 1e-12;
    for (const auto& p : xy) extent = std::max(extent, p.cwiseAbs().maxCoeff());
    extent *= 1.05;
  }
  const auto px = [&](const Eigen::Vector2d& p) { return Eigen::Vector2d(half + half * p.x() / extent, half - half * p.y() / extent); };
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << kCanvas << "\" height=\"" << kCanvas
      << "\" viewBox=\"0 0 " << kCanvas << ' ' << kCanvas << "\">\n";
  if (disk) out << "<circle cx=\"" << half << "\" cy=\"" << half << "\" r=\"" << half << "\" fill=\"none\" stroke=\"#888\"/>\n";
  out << "<g stroke=\"#4477aa\" stroke-opacity=\"0.25\" stroke-width=\"0.5\">\n";
  for (const Edge& e : g.edges()) {
    const auto a = px(xy[static_cast<std::size_t>(e.u)]);
    const auto b = px(xy[static_cast<std::size_t>(e.v)]);
    out << "<line x1=\"" << a.x() << "\" y1=\"" << a.y() << "\" x2=\"" << b.x() << "\" y2=\"" << b.y() << "\"/>\n";
  }
  out << "</g>\n<g fill=\"#cc3311\">\n";
  for (const auto& p : xy) {
    const auto c = px(p);
    out << "<circle cx=\"" << c.x() << "\" cy=\"" << c.y() << "\" r=\"2\"/>\n";
  }
  out << "</g>\n</svg>\n";
  return out.str();
}

}  // namespace

RotationWeights parse_rotation_weights(std::string_view name) {
  if (name == "degree") return RotationWeights::Degree;
  if (name == "uniform") return RotationWeights::Uniform;
  throw ConfigError("unknown rotation weights '" + std::string(name) + "' (expected degree or uniform)");
}

Eigen::VectorXd rotation_weights(const Graph& g, RotationWeights kind) {
  if (kind == RotationWeights::Uniform) return Eigen::VectorXd::Ones(g.num_nodes());
  return g.degrees().cast<double>();
}

std::vector<PolarPoint> canonical_rotation(std::span<const PolarPoint> points, const Eigen::VectorXd& weights) {
  check_weights(points, weights);
  std::vector<PolarPoint> out(points.begin(), points.end());
  if (out.empty()) return out;
  // min_element returns the first minimum, so ties go to the lowest id.
  const auto center = std::min_element(out.begin(), out.end(), [](const PolarPoint& a, const PolarPoint& b) {
    return a.r < b.r;
  });
  const double shift = center->theta;
  for (auto& p : out) p.theta = wrap_angle(p.theta - shift);
  center->theta = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) mass += weights(static_cast<Eigen::Index>(i)) * std::sin(out[i].theta);
  if (mass < 0.0) {
    for (auto& p : out) p.theta = p.theta == 0.0 ? 0.0 : kTwoPi - p.theta;
  }
  return out;
}

std::vector<EuclideanPoint> canonical_rotation(std::span<const EuclideanPoint> points, const Eigen::VectorXd& weights) {
  check_weights(points, weights);
  std::vector<EuclideanPoint> out(points.begin(), points.end());
  if (out.empty()) return out;
  double cx = 0.0, cy = 0.0;
  for (const auto& p : out) {
    cx += p.x;
    cy += p.y;
  }
  cx /= static_cast<double>(out.size());
  cy /= static_cast<double>(out.size());
  for (auto& p : out) {
    p.x -= cx;
    p.y -= cy;
  }
  const auto center = std::min_element(out.begin(), out.end(), [](const EuclideanPoint& a, const EuclideanPoint& b) {
    return std::hypot(a.x, a.y) < std::hypot(b.x, b.y);
  });
  const double phi = std::atan2(center->y, center->x);
  const double c = std::cos(phi), s = std::sin(phi);
  for (auto& p : out) p = {c * p.x + s * p.y, -s * p.x + c * p.y};
  center->y = 0.0;
  double mass = 0.0;
  for (std::size_t i = 0; i < out.size(); ++i) mass += weights(static_cast<Eigen::Index>(i)) * out[i].y;
  if (mass < 0.0) {
    for (auto& p : out) p.y = -p.y;
  }
  return out;
}

std::vector<EuclideanPoint> procrustes_align(std::span<const EuclideanPoint> points,
                                             std::span<const EuclideanPoint> reference) {
  if (points.size() != reference.size()) throw ConfigError("procrustes_align: point sets differ in size");
  const auto n = static_cast<Eigen::Index>(points.size());
  if (n == 0) return {};
  Eigen::MatrixX2d x(n, 2), y(n, 2);
  for (Eigen::Index i = 0; i < n; ++i) {
    x.row(i) << points[static_cast<std::size_t>(i)].x, points[static_cast<std::size_t>(i)].y;
    y.row(i) << reference[static_cast<std::size_t>(i)].x, reference[static_cast<std::size_t>(i)].y;
  }
  const Eigen::RowVector2d mx = x.colwise().mean(), my = y.colwise().mean();
  x.rowwise() -= mx;
  y.rowwise() -= my;
  const Eigen::JacobiSVD<Eigen::Matrix2d> svd(x.transpose() * y, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Matrix2d q = svd.matrixU() * svd.matrixV().transpose();
  const Eigen::MatrixX2d aligned = (x * q).rowwise() + my;
  std::vector<EuclideanPoint> out(points.size());
  for (Eigen::Index i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = {aligned(i, 0), aligned(i, 1)};
  return out;
}

double PoincarePoint::x() const { return rho * std::cos(theta); }
double PoincarePoint::y() const { return rho * std::sin(theta); }

PoincarePoint to_poincare(const PolarPoint& p) { return {std::tanh(0.5 * p.r), p.theta}; }

std::string embedding_svg(const Graph& g, std::span<const PolarPoint> points) {
  if (static_cast<int>(points.size()) != g.num_nodes()) throw ConfigError("embedding_svg: one point per node required");
  std::vector<Eigen::Vector2d> xy;
  xy.reserve(points.size());
  for (const auto& p : points) {
    const PoincarePoint q = to_poincare(p);
    xy.emplace_back(q.x(), q.y());
  }
  return svg(g, xy, true);
}

std::string embedding_svg(const Graph& g, std::span<const EuclideanPoint> points) {
  if (static_cast<int>(points.size()) != g.num_nodes()) throw ConfigError("embedding_svg: one point per node required");
  std::vector<Eigen::Vector2d> xy;
  xy.reserve(points.size());
  for (const auto& p : points) xy.emplace_back(p.x, p.y);
  return svg(g, xy, false);
}

}  // namespace hcls
