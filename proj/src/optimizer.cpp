#include "ifp/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <deque>

#include <Eigen/Dense>

#include "ifp/rate.hpp"
#include "ifp/rng.hpp"

namespace ifp {

namespace {

constexpr double kProductTolerance = 1e-9;
constexpr std::size_t kOscillationWindow = 6;
constexpr double kOscillationVariation = 1e-12;
constexpr double kDuplicateDistance = 1e-8;

void require_positive(const Eigen::VectorXd& x, const char* what) {
  if (x.size() == 0) throw NonPositiveInput(std::string(what) + ": empty vector");
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0.0)) throw NonPositiveInput(std::string(what) + ": entries must be strictly positive");
  }
}

Eigen::LLT<Eigen::MatrixXd> spd_factor(const Eigen::MatrixXd& G) {
  if (G.rows() != G.cols()) throw DimensionMismatch("coupling matrix must be square");
  const double scale = std::max(G.cwiseAbs().maxCoeff(), 1.0);
  if ((G - G.transpose()).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw NonSpdCoupling("coupling matrix is not symmetric");
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (G + G.transpose()));
  if (llt.info() != Eigen::Success) throw NonSpdCoupling();
  return llt;
}

// Closed-form allocation for the diagonal part of G; used to initialize the
// fixed-point iteration.
PowerVector diagonal_init(const Eigen::MatrixXd& G) {
  Eigen::VectorXd log_d = -0.5 * G.diagonal().array().log();
  return gamma_normalize((log_d.array() - log_d.mean()).exp());
}

}  // namespace

PowerVector::PowerVector(Eigen::VectorXd values) : values_(std::move(values)) {
  require_positive(values_, "power vector");
  const double log_prod = values_.array().log().sum();
  if (std::abs(std::expm1(log_prod)) > kProductTolerance) {
    throw NonPositiveInput("power vector product must equal 1");
  }
}

const char* to_string(ConvergedFlag flag) {
  switch (flag) {
    case ConvergedFlag::FixedPoint:
      return "fixed_point";
    case ConvergedFlag::OscillationDetected:
      return "oscillation";
    case ConvergedFlag::IterationCap:
      return "iteration_cap";
  }
  return "unknown";
}

double hilbert_metric(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  if (x.size() != y.size()) throw DimensionMismatch("hilbert_metric requires equal sizes");
  require_positive(x, "hilbert_metric");
  require_positive(y, "hilbert_metric");
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double r = x[i] / y[i];
    lo = std::min(lo, r);
    hi = std::max(hi, r);
  }
  return std::log(hi) - std::log(lo);
}

PowerVector gamma_normalize(const Eigen::VectorXd& x) {
  require_positive(x, "gamma_normalize");
  Eigen::ArrayXd logs = x.array().log();
  return PowerVector((logs - logs.mean()).exp().matrix());
}

Eigen::MatrixXd coupling_matrix(const IntMatrix& A, const Eigen::MatrixXd& M) {
  if (A.rows() != M.rows() || A.cols() != M.cols() || M.rows() != M.cols()) {
    throw DimensionMismatch("coupling_matrix requires matching square inputs");
  }
  return (A * A.transpose()).cast<double>().cwiseProduct(M);
}

RaResult ra_fixed_point(const Eigen::MatrixXd& G, const PowerVector& d_init, double tolerance, int iteration_cap,
                        std::vector<RaStep>* trace) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const auto llt = spd_factor(G);
  if (d_init.size() != G.rows()) throw DimensionMismatch("d_init size must match G");

  Eigen::VectorXd current = d_init.vec();
  std::deque<double> window;
  RaResult result;
  for (int t = 1; t <= iteration_cap; ++t) {
    const Eigen::VectorXd unscaled = llt.solve(current.cwiseInverse());
    if ((unscaled.array() <= 0.0).any()) {
      // The map left the positive cone: the contraction premise does not hold
      // here, so report the oscillation flag with the last valid iterate.
      result.d = PowerVector(current);
      result.iterations = t;
      result.flag = ConvergedFlag::OscillationDetected;
      return result;
    }
    const PowerVector next = gamma_normalize(unscaled);
    const double step = hilbert_metric(next.vec(), current);
    if (trace) trace->push_back({t, step, next.vec().dot(G * next.vec())});

    if (step <= tolerance) {
      result.d = next;
      result.iterations = t;
      result.flag = ConvergedFlag::FixedPoint;
      return result;
    }

    window.push_back(step);
    if (window.size() > kOscillationWindow) window.pop_front();
    if (window.size() == kOscillationWindow) {
      const auto [mn, mx] = std::minmax_element(window.begin(), window.end());
      if (*mn > tolerance && *mx - *mn < kOscillationVariation) {
        // Period-2 regime: keep the better cycle point by objective.
        const double obj_next = next.vec().dot(G * next.vec());
        const double obj_curr = current.dot(G * current);
        result.d = obj_next <= obj_curr ? next : PowerVector(current);
        result.iterations = t;
        result.flag = ConvergedFlag::OscillationDetected;
        return result;
      }
    }
    if (t == iteration_cap) {
      // Stagnated without meeting the oscillation test; keep the better of
      // the last two iterates.
      const double obj_next = next.vec().dot(G * next.vec());
      const double obj_curr = current.dot(G * current);
      result.d = obj_next <= obj_curr ? next : PowerVector(current);
      result.iterations = iteration_cap;
      result.flag = ConvergedFlag::IterationCap;
      return result;
    }
    current = next.vec();
  }
  result.d = PowerVector(current);
  result.iterations = iteration_cap;
  result.flag = ConvergedFlag::IterationCap;
  return result;
}

RaResult ra_fixed_point(const Eigen::MatrixXd& G, double tolerance, int iteration_cap, std::vector<RaStep>* trace) {
  spd_factor(G);
  return ra_fixed_point(G, diagonal_init(G), tolerance, iteration_cap, trace);
}

PowerVector closed_form_diagonal(const Eigen::MatrixXd& M, const IntMatrix& A) {
  const Eigen::MatrixXd G = coupling_matrix(A, M);
  Eigen::FullPivLU<Eigen::MatrixXd> lu(G);
  if (!lu.isInvertible()) throw SingularCoupling();
  const Eigen::VectorXd row_sums = lu.solve(Eigen::VectorXd::Ones(G.rows()));
  if ((row_sums.array() <= 0.0).any()) {
    throw SingularCoupling("closed form requires positive inverse row sums");
  }
  const Eigen::ArrayXd log_l = row_sums.array().log();
  return PowerVector((0.5 * (log_l - log_l.mean())).exp().matrix());
}

std::optional<double> projective_diameter(const Eigen::MatrixXd& positive_map) {
  if ((positive_map.array() <= 0.0).any()) return std::nullopt;
  const Eigen::Index n = positive_map.rows();
  const Eigen::Index m = positive_map.cols();
  double best = 1.0;
  for (Eigen::Index i = 0; i < m; ++i) {
    for (Eigen::Index j = 0; j < m; ++j) {
      for (Eigen::Index p = 0; p < n; ++p) {
        for (Eigen::Index q = 0; q < n; ++q) {
          const double ratio =
              positive_map(p, i) * positive_map(q, j) / (positive_map(p, j) * positive_map(q, i));
          best = std::max(best, ratio);
        }
      }
    }
  }
  return std::log(best);
}

std::optional<double> birkhoff_contraction_ratio(const Eigen::MatrixXd& G) {
  const auto llt = spd_factor(G);
  const Eigen::MatrixXd inverse = llt.solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
  const auto diameter = projective_diameter(inverse);
  if (!diameter) return std::nullopt;
  return std::tanh(*diameter / 4.0);
}

std::optional<int> ra_iteration_bound(const Eigen::MatrixXd& G, const PowerVector& d_init, double tolerance) {
  if (!(tolerance > 0.0)) throw std::invalid_argument("tolerance must be positive");
  const auto llt = spd_factor(G);
  const Eigen::MatrixXd inverse = llt.solve(Eigen::MatrixXd::Identity(G.rows(), G.cols()));
  const auto diameter = projective_diameter(inverse);
  if (!diameter) return std::nullopt;

  const Eigen::VectorXd first = inverse * d_init.vec().cwiseInverse();
  if ((first.array() <= 0.0).any()) return std::nullopt;
  const double initial_step = hilbert_metric(first, d_init.vec());
  if (initial_step <= tolerance) return 0;
  const double kappa = std::tanh(*diameter / 4.0);
  if (kappa <= 0.0) return 1;  // projective collapse: one step reaches the fixed direction
  const double steps = (std::log(tolerance) - std::log(initial_step)) / std::log(kappa);
  return static_cast<int>(std::ceil(steps));
}

IntMatrix d_to_A(const Eigen::MatrixXd& M, const PowerVector& d, double lll_delta) {
  const auto llt = spd_factor(M);
  const Eigen::MatrixXd basis = Eigen::MatrixXd(llt.matrixU()) * d.vec().asDiagonal();
  return solve_sivp_unimodular(basis, lll_delta);
}

namespace {

IntMatrix derive_integer_matrix(const Eigen::MatrixXd& M, const PowerVector& d, const AoOptions& options) {
  if (!options.sivp_solver) return d_to_A(M, d, options.lll_delta);
  const auto llt = spd_factor(M);
  const Eigen::MatrixXd basis = Eigen::MatrixXd(llt.matrixU()) * d.vec().asDiagonal();
  return options.sivp_solver(basis);
}

}  // namespace

SolveOutcome alternating_optimize(const Eigen::MatrixXd& M, double rho, const PowerVector& d_init,
                                  const AoOptions& options) {
  spd_factor(M);
  SolveOutcome outcome;
  IntMatrix a = derive_integer_matrix(M, d_init, options);

  PowerVector d;
  double objective = std::numeric_limits<double>::infinity();
  std::vector<IntMatrix> visited;
  for (int outer = 1; outer <= options.max_outer; ++outer) {
    visited.push_back(a);
    const Eigen::MatrixXd g = coupling_matrix(a, M);
    const RaResult ra = ra_fixed_point(g, options.ra_tolerance, options.ra_iteration_cap);
    const double candidate_objective = trace_objective(a, ra.d.vec(), M);
    if (candidate_objective > objective * (1.0 + 1e-12)) {
      // Can only happen when the inner solve is in a non-contractive regime;
      // keep the previous, better pair.
      outcome.flag = ConvergedFlag::IterationCap;
      break;
    }
    d = ra.d;
    objective = candidate_objective;
    outcome.objective_trace.push_back(objective);
    outcome.iterations = outer;

    const IntMatrix a_next = derive_integer_matrix(M, d, options);
    if (a_next == a) {
      outcome.flag = ConvergedFlag::FixedPoint;
      break;
    }
    if (trace_objective(a_next, d.vec(), M) > objective * (1.0 + 1e-12)) {
      // The lattice step failed to improve on the incumbent; moving would
      // break monotonicity, so stop here.
      outcome.flag = ConvergedFlag::IterationCap;
      break;
    }
    // The alternation is deterministic, so revisiting a matrix proves an
    // endless cycle; stop instead of running out the cap.
    if (std::find(visited.begin(), visited.end(), a_next) != visited.end()) {
      outcome.flag = ConvergedFlag::IterationCap;
      break;
    }
    a = a_next;
    outcome.flag = ConvergedFlag::IterationCap;
  }

  outcome.d = d;
  outcome.A = a;
  outcome.objective = objective;
  outcome.sum_rate = sum_rate_high_snr(a, d.vec(), M, rho);
  return outcome;
}

std::vector<Eigen::VectorXd> sample_ray_points(const PowerVector& center, double radius, int count,
                                               std::uint64_t seed, std::uint64_t round, int resample_cap) {
  if (count < 1) throw std::invalid_argument("ray count must be positive");
  if (radius < 0.0) throw std::invalid_argument("radius must be nonnegative");
  const int k = center.size();
  std::vector<Eigen::VectorXd> points;
  points.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) {
    RngStream rng(substream_seed(seed, round, static_cast<std::uint64_t>(i)));
    double local_radius = radius;
    int attempts = 0;
    for (;;) {
      Eigen::VectorXd direction = rng.gaussian_vector(k);
      const double norm = direction.norm();
      if (norm == 0.0) continue;
      Eigen::VectorXd point = center.vec() + (local_radius / norm) * direction;
      if ((point.array() > 0.0).all()) {
        points.push_back(std::move(point));
        break;
      }
      if (++attempts >= resample_cap) {
        local_radius *= 0.5;
        attempts = 0;
      }
    }
  }
  return points;
}

SolveOutcome mcn_sps(const Eigen::MatrixXd& M, double rho, const McnSpsOptions& options) {
  spd_factor(M);
  const int k = static_cast<int>(M.rows());
  const int rays = options.num_rays > 0 ? options.num_rays : 2 * k;
  if (!(options.initial_radius > options.radius_tolerance && options.radius_tolerance > 0.0)) {
    throw std::invalid_argument("pattern search requires r0 > radius tolerance > 0");
  }

  SolveOutcome center = alternating_optimize(M, rho, PowerVector::ones(k), options.ao);
  SolveOutcome best = center;

  double radius = options.initial_radius;
  int round = 0;
  std::vector<double> rate_trace;
  while (radius > options.radius_tolerance) {
    ++round;
    // Fresh re-solve from the current center. When the center is not
    // self-consistent the re-solve can land in a worse cone; keeping the
    // better of the two keeps the center's rate monotone, which is what
    // guarantees termination of the adoption loop.
    try {
      const SolveOutcome resolved = alternating_optimize(M, rho, center.d, options.ao);
      if (resolved.sum_rate >= center.sum_rate) center = resolved;
    } catch (const SingularBasis&) {
    } catch (const NonConvergence&) {
    }
    if (center.sum_rate > best.sum_rate) best = center;

    const auto points = sample_ray_points(center.d, radius, rays, options.seed, static_cast<std::uint64_t>(round),
                                          options.ray_resample_cap);
    std::vector<SolveOutcome> candidates;
    candidates.reserve(points.size());
    for (const auto& point : points) {
      // A ray skewed enough to break the lattice rank check is abandoned for
      // this round, like rays that leave the positive orthant.
      try {
        candidates.push_back(alternating_optimize(M, rho, gamma_normalize(point), options.ao));
      } catch (const SingularBasis&) {
      } catch (const NonConvergence&) {
      }
    }
    // Merge coinciding candidates (same A, same allocation up to projective
    // distance); the earliest ray index survives.
    std::vector<int> kept;
    for (int i = 0; i < static_cast<int>(candidates.size()); ++i) {
      bool duplicate = false;
      for (int j : kept) {
        if (candidates[j].A == candidates[i].A &&
            hilbert_metric(candidates[j].d.vec(), candidates[i].d.vec()) <= kDuplicateDistance) {
          duplicate = true;
          break;
        }
      }
      if (!duplicate) kept.push_back(i);
    }
    int winner = -1;
    for (int j : kept) {
      if (candidates[j].sum_rate > center.sum_rate && (winner < 0 || candidates[j].sum_rate > candidates[winner].sum_rate)) {
        winner = j;
      }
    }
    if (winner >= 0) {
      center = candidates[winner];
      if (center.sum_rate > best.sum_rate) best = center;
    } else {
      radius *= 0.5;
    }
    rate_trace.push_back(center.objective);
  }

  best.iterations = round;
  best.final_radius = radius;
  best.objective_trace = std::move(rate_trace);
  return best;
}

}  // namespace ifp
