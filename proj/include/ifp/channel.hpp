#pragma once

#include <cstdint>
#include <string>

#include <Eigen/Core>

#include "ifp/errors.hpp"
#include "ifp/lattice.hpp"

namespace ifp {

enum class PrecoderKind { Dif, Rif };

// Channel-state-information model. Perfect CSI carries no parameters; the
// MMSE model draws the estimate as H - E and the ML model as H + E, with
// E ~ N(0, sigma_e2 I).
struct CsiModel {
  enum class Kind { Perfect, Mmse, Ml };
  Kind kind = Kind::Perfect;
  double sigma_e2 = 0.0;
  double sigma_h2 = 1.0;

  static CsiModel perfect() { return {}; }
  static CsiModel mmse(double sigma_e2) { return {Kind::Mmse, sigma_e2, 1.0}; }
  static CsiModel ml(double sigma_h2, double sigma_e2) { return {Kind::Ml, sigma_e2, sigma_h2}; }
  bool is_perfect() const { return kind == Kind::Perfect; }
};

std::string to_string(PrecoderKind kind);
std::string to_string(const CsiModel& csi);

// K x N channel with i.i.d. nonnegative Rayleigh entries of unit mean square:
// h = sqrt(x^2 + y^2) / sqrt(2), x and y standard normal. Deterministic under
// the seed.
Eigen::MatrixXd sample_rayleigh(int users, int antennas, std::uint64_t seed);

// Doubled-dimension real model [[Re, -Im], [Im, Re]] of a complex channel.
Eigen::MatrixXd complex_to_real_embedding(const Eigen::MatrixXcd& complex_channel);

// Training-based estimation error variance K * sigma_z2 / (n_train * e_train).
double estimation_error_variance(int users, double sigma_z2, double n_train, double e_train);

// Draws a channel estimate under the given CSI model. MMSE returns H - E, ML
// returns H + E. Throws PerfectCsiNoOp for perfect CSI.
Eigen::MatrixXd estimate_channel(const Eigen::MatrixXd& true_channel, const CsiModel& csi, std::uint64_t seed);

// Coupling-input matrix M for the sum-rate objective. Perfect CSI yields
// (H H^T)^-1 for DIF and ((K/rho) I + H H^T)^-1 for RIF; under imperfect CSI
// the estimation-error statistics enter the inverse:
//   MMSE:  gram + K sigma_e2 I                     (+ (K/rho) I for RIF)
//   ML:    gram * sh2/(sh2+se2) + K sigma_e2 I     (+ K(sh2+se2)/(rho sh2) I for RIF)
// Pass the estimated channel when csi is not perfect. The output is SPD;
// throws SingularGram when the inner matrix is too ill conditioned (DIF in
// overload).
Eigen::MatrixXd coupling_input_matrix(const Eigen::MatrixXd& channel, PrecoderKind kind, double rho,
                                      const CsiModel& csi = CsiModel::perfect());

// Precoder P = (1/eta) H^T inner^-1 D A with the same inner matrix as
// coupling_input_matrix and eta chosen so that Tr(P P^T) = rho.
Eigen::MatrixXd build_precoder(const Eigen::MatrixXd& channel, const Eigen::VectorXd& d, const IntMatrix& A,
                               PrecoderKind kind, const CsiModel& csi, double rho);

}  // namespace ifp
