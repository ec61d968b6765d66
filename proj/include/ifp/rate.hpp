#pragma once

#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ifp/errors.hpp"
#include "ifp/lattice.hpp"

namespace ifp {

struct RateReport {
  double sum_rate_bits = 0.0;
  std::optional<std::vector<double>> per_user;
  double objective = 0.0;
};

// Trace objective d^T ((A A^T) o M) d, the quantity minimized by the joint
// power/integer-matrix optimization.
double trace_objective(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M);

// Same objective through the factored route sum_l ||T D a_l||^2 with
// T^T T = M. Kept as an independent algebraic path for cross-checking.
double trace_objective_factor_form(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M);

// High-SNR sum rate (K/2) log2+( rho (prod d)^2 / objective ), in bits per
// channel use.
double sum_rate_high_snr(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M, double rho);

// Bundled sum-rate evaluation; the per-user list is filled when the channel
// and precoder are supplied.
RateReport evaluate_rates(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M, double rho);
RateReport evaluate_rates(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M, double rho,
                          const Eigen::MatrixXd& channel, const Eigen::MatrixXd& precoder);

// Per-user achievable rates R_i = log2+( 1 / (a_i^T (I - c h h^T) a_i) ) with
// h the i-th row of H P and c = rho / (rho ||h||^2 + 1). Experimental: the
// published per-user form is internally inconsistent with the trace
// objective's column convention, so this row-vector reading is informational
// only.
std::vector<double> per_user_rate(const IntMatrix& A, const Eigen::MatrixXd& channel, const Eigen::MatrixXd& precoder,
                                  double rho);

struct WaterfillingResult {
  double rate_bits = 0.0;
  Eigen::VectorXd mode_gains;  // eigenvalues of H H^T, descending
  Eigen::VectorXd powers;      // per-mode power, sums to K
  double water_level = 0.0;
};

// Water-filling capacity bound (1/2) log2 det(I + (rho/K) H W H^T) with the
// diagonal allocation W found by bisection on the water level.
WaterfillingResult waterfilling_allocation(const Eigen::MatrixXd& channel, double rho);
double waterfilling_upper_bound(const Eigen::MatrixXd& channel, double rho);

}  // namespace ifp
