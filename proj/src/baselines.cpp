#include "ifp/baselines.hpp"

#include <algorithm>
#include <cmath>

#include "ifp/rate.hpp"
#include "ifp/rng.hpp"

namespace ifp {

EqualPowerResult equal_power(const Eigen::MatrixXd& M, double lll_delta) {
  const int k = static_cast<int>(M.rows());
  const PowerVector d = PowerVector::ones(k);
  return {d_to_A(M, d, lll_delta), d};
}

double rzf_rate(const Eigen::MatrixXd& channel, double rho) {
  const int k = static_cast<int>(channel.rows());
  const Eigen::MatrixXd m = coupling_input_matrix(channel, PrecoderKind::Rif, rho);
  return sum_rate_high_snr(IntMatrix::Identity(k, k), Eigen::VectorXd::Ones(k), m, rho);
}

SolveOutcome pso_optimize(const Eigen::MatrixXd& M, double rho, const PsoOptions& options, PsoStats* stats) {
  const int k = static_cast<int>(M.rows());
  const int swarm = options.swarm_size;
  RngStream rng(substream_seed(options.seed, 0x50534fULL));

  struct Particle {
    Eigen::VectorXd position;  // log-domain, zero sum
    Eigen::VectorXd velocity;
    Eigen::VectorXd best_position;
    double best_rate = -1.0;
  };

  const auto project = [](Eigen::VectorXd& y) { y.array() -= y.mean(); };

  struct Evaluation {
    PowerVector d;
    IntMatrix A;
    double objective = 0.0;
    double rate = -std::numeric_limits<double>::infinity();
    bool valid = false;
  };
  // Allocations skewed enough to break the lattice rank check earn the worst
  // fitness instead of aborting the swarm.
  const auto evaluate = [&](const Eigen::VectorXd& y) {
    Evaluation e;
    try {
      e.d = gamma_normalize(y.array().exp().matrix());
      e.A = d_to_A(M, e.d, options.lll_delta);
      e.objective = trace_objective(e.A, e.d.vec(), M);
      e.rate = sum_rate_high_snr(e.A, e.d.vec(), M, rho);
      e.valid = true;
    } catch (const SingularBasis&) {
    } catch (const NonConvergence&) {
    }
    return e;
  };

  std::vector<Particle> particles(static_cast<size_t>(swarm));
  SolveOutcome best;
  best.sum_rate = -1.0;
  for (auto& p : particles) {
    p.position = Eigen::VectorXd::NullaryExpr(k, [&](Eigen::Index) { return rng.uniform(-1.0, 1.0); });
    project(p.position);
    p.velocity = Eigen::VectorXd::NullaryExpr(
        k, [&](Eigen::Index) { return rng.uniform(-options.velocity_clamp, options.velocity_clamp); });
    const Evaluation e = evaluate(p.position);
    p.best_position = p.position;
    p.best_rate = e.rate;
    if (e.valid && e.rate > best.sum_rate) {
      best.d = e.d;
      best.A = e.A;
      best.objective = e.objective;
      best.sum_rate = e.rate;
    }
  }
  if (best.d.size() == 0) throw NonConvergence("no particle produced a valid evaluation");
  Eigen::VectorXd global_best = best.d.vec().array().log().matrix();
  project(global_best);

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    for (auto& p : particles) {
      for (int i = 0; i < k; ++i) {
        const double r1 = rng.uniform();
        const double r2 = rng.uniform();
        double v = options.inertia * p.velocity[i] + options.cognitive * r1 * (p.best_position[i] - p.position[i]) +
                   options.social * r2 * (global_best[i] - p.position[i]);
        v = std::clamp(v, -options.velocity_clamp, options.velocity_clamp);
        p.velocity[i] = v;
      }
      if (stats) stats->max_abs_velocity = std::max(stats->max_abs_velocity, p.velocity.cwiseAbs().maxCoeff());
      p.position += p.velocity;
      project(p.position);
      const Evaluation e = evaluate(p.position);
      if (e.rate > p.best_rate) {
        p.best_rate = e.rate;
        p.best_position = p.position;
      }
      if (e.valid && e.rate > best.sum_rate) {
        best.d = e.d;
        best.A = e.A;
        best.objective = e.objective;
        best.sum_rate = e.rate;
        global_best = p.position;
      }
    }
    best.objective_trace.push_back(best.objective);
  }

  best.iterations = options.max_iterations;
  best.flag = ConvergedFlag::IterationCap;
  return best;
}

}  // namespace ifp
