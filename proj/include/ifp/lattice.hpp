#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "ifp/errors.hpp"

namespace ifp {

using IntMatrix = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

// Outcome of an LLL run. `reduced` equals `basis * transform` up to 1e-8 per
// entry and `transform` is unimodular with |det| = 1 exactly.
struct ReductionResult {
  Eigen::MatrixXd reduced;
  IntMatrix transform;
  int swaps = 0;
  int size_reductions = 0;
  // Diagnostic: size reductions with a positive quotient. Stays zero when the
  // input Gram is a dense M-matrix.
  int positive_quotients = 0;
};

// LLL basis reduction on the columns of `basis` (square, full rank) with
// Lovasz constant `delta` in (1/4, 1]. The reduction operates on the QR
// factors; the unimodular transform is accumulated exactly in integer
// arithmetic from the elementary size-reduction and swap operations.
//
// Throws SingularBasis when the rank check fails and NonConvergence when the
// swap count exceeds the numerical-breakdown cap or the result fails
// validation.
ReductionResult lll_reduce(const Eigen::MatrixXd& basis, double delta = 0.75);

// SIVP solve realized through LLL: returns the unimodular transform whose
// columns, applied to `basis`, give short independent lattice vectors.
IntMatrix solve_sivp_unimodular(const Eigen::MatrixXd& basis, double delta = 0.75);

// Checks the size-reduction and Lovasz conditions on the R factor of `basis`
// within tolerance `tol`.
bool verify_lll_reduced(const Eigen::MatrixXd& basis, double delta, double tol = 1e-9);

// Successive minima by exhaustive enumeration of integer coefficient vectors
// with entries in [-coeff_bound, coeff_bound]. Independent vectors are chosen
// greedily by ascending norm (ties by lexicographic coefficient order) with
// exact integer rank checks. Verification oracle; K <= 4 only.
std::vector<double> successive_minima_bruteforce(const Eigen::MatrixXd& basis, int coeff_bound);

// Exact |det| of an integer matrix (fraction-free Bareiss elimination).
// Throws NonConvergence if intermediate values overflow 128-bit integers.
std::int64_t integer_abs_det(const IntMatrix& m);

}  // namespace ifp
