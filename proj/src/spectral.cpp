#include "spectral.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SparseCore>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "hcls/random.hpp"

namespace hcls::detail {

SpectralLayout spectral_layout(const Graph& g) {
  const int n = g.num_nodes();
  SpectralLayout out;
  out.angle = Eigen::VectorXd::Zero(n);
  out.quantile.resize(n);

  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return g.degree(a) > g.degree(b); });
  for (int rank = 0; rank < n; ++rank) out.quantile(order[static_cast<std::size_t>(rank)]) = (rank + 0.5) / n;
  if (n < 3) return out;

  // M = D^-1/2 (A + tau/n J) D^-1/2 with tau the mean degree, applied without
  // forming the dense matrix. Subspace iteration on (M + I) / 2, whose
  // spectrum lies in [0, 1] with the same ordering.
  const Eigen::SparseMatrix<double> a = g.adjacency();
  const double tau = std::max(2.0 * g.num_edges() / n, 1.0);
  Eigen::VectorXd inv_sqrt(n);
  for (int i = 0; i < n; ++i) inv_sqrt(i) = 1.0 / std::sqrt(g.degree(i) + tau);
  const auto apply = [&](const Eigen::MatrixXd& x) {
    const Eigen::MatrixXd y = inv_sqrt.asDiagonal() * x;
    Eigen::MatrixXd m = a * y;
    m.rowwise() += (tau / n) * y.colwise().sum();
    return Eigen::MatrixXd(inv_sqrt.asDiagonal() * m);
  };

  const int k = std::min(n, 8);
  Rng rng(0x5bec7a1ULL);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd x(n, k);
  for (Eigen::Index i = 0; i < x.size(); ++i) x.data()[i] = normal(rng);
  x = Eigen::HouseholderQR<Eigen::MatrixXd>(x).householderQ() * Eigen::MatrixXd::Identity(n, k);

  Eigen::MatrixXd ritz;
  for (int iter = 1; iter <= 5000; ++iter) {
    const Eigen::MatrixXd y = 0.5 * (apply(x) + x);
    x = Eigen::HouseholderQR<Eigen::MatrixXd>(y).householderQ() * Eigen::MatrixXd::Identity(n, k);
    if (iter % 20 != 0) continue;
    const Eigen::MatrixXd mx = apply(x);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> small(x.transpose() * mx);
    ritz = x * small.eigenvectors();
    const Eigen::MatrixXd residual = apply(ritz) - ritz * small.eigenvalues().asDiagonal();
    // Eigenvalues ascend; the top three vectors are the last three columns.
    if (residual.rightCols(3).colwise().norm().maxCoeff() < 1e-6) break;
  }
  const Eigen::VectorXd u = inv_sqrt.asDiagonal() * ritz.col(k - 2);
  const Eigen::VectorXd v = inv_sqrt.asDiagonal() * ritz.col(k - 3);
  for (int i = 0; i < n; ++i) out.angle(i) = std::atan2(v(i), u(i));
  return out;
}

}  // namespace hcls::detail
