#pragma once

#include <Eigen/Dense>

#include "ifp/rng.hpp"

namespace testutil {

// 3x3 channel realization used across the small-instance checks.
inline Eigen::MatrixXd sample_channel_a() {
  Eigen::MatrixXd h(3, 3);
  h << 0.7826, 0.6097, 0.7154,
       1.8776, 1.8774, 0.1899,
       1.8507, 0.0694, 0.3630;
  return h;
}

// 3x3 channel realization whose fixed-point iteration oscillates at low SNR.
inline Eigen::MatrixXd sample_channel_b() {
  Eigen::MatrixXd h(3, 3);
  h << 0.5472, 0.1643, 0.4058,
       1.2850, 0.6481, 1.1394,
       0.5685, 1.1173, 0.7982;
  return h;
}

// Well-conditioned random square basis with entries in [-2, 2].
inline Eigen::MatrixXd random_basis(int n, ifp::RngStream& rng) {
  for (;;) {
    Eigen::MatrixXd m(n, n);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) m(i, j) = rng.uniform(-2.0, 2.0);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin > 1e-3 && smax / smin < 1e4) return m;
  }
}

// Random SPD matrix with eigenvalues in roughly [0.1, ~2].
inline Eigen::MatrixXd random_spd(int n, ifp::RngStream& rng) {
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m(i, j) = rng.normal();
  return m * m.transpose() / n + 0.1 * Eigen::MatrixXd::Identity(n, n);
}

// SPD matrix whose inverse is entrywise strictly positive: diagonally
// dominant with nonpositive off-diagonal entries.
inline Eigen::MatrixXd random_positive_inverse_spd(int n, ifp::RngStream& rng) {
  Eigen::MatrixXd b(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) b(i, j) = rng.uniform(0.05, 1.0);
  b = 0.5 * (b + b.transpose()).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(b);
  const double shift = es.eigenvalues().maxCoeff() * rng.uniform(1.05, 1.6);
  return shift * Eigen::MatrixXd::Identity(n, n) - b;
}

}  // namespace testutil
