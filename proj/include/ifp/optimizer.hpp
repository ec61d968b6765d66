#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "ifp/errors.hpp"
#include "ifp/lattice.hpp"

namespace ifp {

// Positive power-allocation vector constrained to unit product (the diagonal
// of D with det(D) = 1).
class PowerVector {
 public:
  PowerVector() = default;
  explicit PowerVector(Eigen::VectorXd values);
  static PowerVector ones(int k) { return PowerVector(Eigen::VectorXd::Ones(k)); }

  const Eigen::VectorXd& vec() const { return values_; }
  double operator[](Eigen::Index i) const { return values_[i]; }
  int size() const { return static_cast<int>(values_.size()); }

 private:
  Eigen::VectorXd values_;
};

enum class ConvergedFlag { FixedPoint, OscillationDetected, IterationCap };

const char* to_string(ConvergedFlag flag);

struct SolveOutcome {
  PowerVector d;
  IntMatrix A;
  double objective = 0.0;
  double sum_rate = 0.0;
  int iterations = 0;
  ConvergedFlag flag = ConvergedFlag::IterationCap;
  std::vector<double> objective_trace;  // one entry per outer iteration / round
  double final_radius = 0.0;            // pattern search only
};

// Projective (Hilbert) distance log(max_i(x_i/y_i) / min_i(x_i/y_i)) on the
// positive cone. Scale invariant; zero exactly on rays.
double hilbert_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Scales a positive vector onto the unit-product manifold. Computed in the
// log domain, so the product constraint holds to machine precision.
PowerVector gamma_normalize(const Eigen::VectorXd& x);

// Interference coupling matrix (A A^T) o M.
Eigen::MatrixXd coupling_matrix(const IntMatrix& A, const Eigen::MatrixXd& M);

struct RaStep {
  int iteration = 0;
  double hilbert_step = 0.0;
  double objective = 0.0;
};

struct RaResult {
  PowerVector d;
  int iterations = 0;
  ConvergedFlag flag = ConvergedFlag::IterationCap;
};

// Reciprocal-approximation fixed point for the power allocation under a fixed
// coupling matrix: iterates d <- Gamma(G^-1 (1 ./ d)) until the Hilbert step
// drops below `tolerance`. A plateauing step metric (window of 6, variation
// below 1e-12) is reported as a period-2 oscillation and the better cycle
// point by objective is returned.
RaResult ra_fixed_point(const Eigen::MatrixXd& G, const PowerVector& d_init, double tolerance, int iteration_cap,
                        std::vector<RaStep>* trace = nullptr);

// Same, starting from the closed-form allocation for diag(G). Exact in one
// step whenever G is diagonal.
RaResult ra_fixed_point(const Eigen::MatrixXd& G, double tolerance, int iteration_cap,
                        std::vector<RaStep>* trace = nullptr);

// Closed-form optimal allocation for diagonal M: d = sqrt(L) / det(L)^(1/2K)
// with L = diag(((A A^T) o M)^-1 1).
PowerVector closed_form_diagonal(const Eigen::MatrixXd& M, const IntMatrix& A);

// Projective diameter log max_{i,j,p,q} (m_pi m_qj) / (m_pj m_qi) of an
// entrywise-positive matrix; nullopt when any entry is not strictly positive.
std::optional<double> projective_diameter(const Eigen::MatrixXd& positive_map);

// Birkhoff contraction ratio tanh(diameter/4) of G^-1.
std::optional<double> birkhoff_contraction_ratio(const Eigen::MatrixXd& G);

// A-priori iteration bound for ra_fixed_point derived from the Birkhoff
// ratio of G^-1; counts contraction steps after the first one. nullopt when
// G^-1 is not entrywise positive.
std::optional<int> ra_iteration_bound(const Eigen::MatrixXd& G, const PowerVector& d_init, double tolerance);

// Integer matrix for a given allocation: LLL-reduces the basis T diag(d)
// (T^T T = M, T the upper-triangular Cholesky factor) and returns the
// unimodular transform.
IntMatrix d_to_A(const Eigen::MatrixXd& M, const PowerVector& d, double lll_delta = 0.75);

// Pluggable SIVP solver: maps a lattice basis to a unimodular transform.
using SivpSolver = std::function<IntMatrix(const Eigen::MatrixXd& basis)>;

struct AoOptions {
  double ra_tolerance = 1e-8;
  // Bounds the inner fixed-point solve when the step metric stagnates without
  // meeting the oscillation test; such runs return their best recent iterate.
  int ra_iteration_cap = 1500;
  int max_outer = 100;
  double lll_delta = 0.75;
  SivpSolver sivp_solver;  // empty: LLL at lll_delta
};

// Alternating optimization: repeats (solve allocation for fixed A, re-derive
// A from the allocation) until A is unchanged or max_outer is reached. The
// objective trace is nonincreasing; on FixedPoint exit the returned pair is
// self-consistent (A == d_to_A(M, d)).
SolveOutcome alternating_optimize(const Eigen::MatrixXd& M, double rho, const PowerVector& d_init,
                                  const AoOptions& options = {});

struct McnSpsOptions {
  double initial_radius = 10.0;
  int num_rays = 0;  // 0 selects 2K
  double radius_tolerance = 1e-4;
  int ray_resample_cap = 64;
  std::uint64_t seed = 0;
  AoOptions ao{};
};

// Multi-cone nested stochastic pattern search. Starts from the alternating
// optimum at d = 1, then repeatedly samples ray points on a sphere of radius
// r around the current center, refines each by alternating optimization, and
// either moves to a strictly better candidate or halves r. Terminates when
// r <= radius_tolerance. The returned sum rate never falls below the initial
// alternating solve.
SolveOutcome mcn_sps(const Eigen::MatrixXd& M, double rho, const McnSpsOptions& options = {});

// Sphere samples d + r * v with v uniform on the unit sphere, resampled (and
// locally contracted after `resample_cap` rejections) until every coordinate
// is positive. Point i draws from the substream (seed, round, i).
std::vector<Eigen::VectorXd> sample_ray_points(const PowerVector& center, double radius, int count,
                                               std::uint64_t seed, std::uint64_t round, int resample_cap = 64);

}  // namespace ifp
