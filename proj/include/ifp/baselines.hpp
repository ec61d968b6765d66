#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "ifp/channel.hpp"
#include "ifp/optimizer.hpp"

namespace ifp {

struct EqualPowerResult {
  IntMatrix A;
  PowerVector d;
};

// Integer-forcing without power optimization: d = 1 and A from the lattice
// solve at that allocation.
EqualPowerResult equal_power(const Eigen::MatrixXd& M, double lll_delta = 0.75);

// Regularized zero-forcing rate surrogate: the high-SNR sum rate at A = I,
// D = I under the regularized coupling matrix.
double rzf_rate(const Eigen::MatrixXd& channel, double rho);

struct PsoOptions {
  int max_iterations = 300;
  int swarm_size = 50;
  double velocity_clamp = 0.1;
  double inertia = 0.7;
  double cognitive = 1.5;
  double social = 1.5;
  std::uint64_t seed = 0;
  double lll_delta = 0.75;
};

struct PsoStats {
  double max_abs_velocity = 0.0;
};

// Global-best particle swarm over log-domain allocations restricted to the
// zero-sum hyperplane. Each evaluation projects onto the unit-product
// manifold and re-derives the integer matrix.
SolveOutcome pso_optimize(const Eigen::MatrixXd& M, double rho, const PsoOptions& options = {},
                          PsoStats* stats = nullptr);

}  // namespace ifp
