#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "ifp/baselines.hpp"
#include "ifp/channel.hpp"
#include "ifp/optimizer.hpp"

namespace ifp {

enum class Method { McnSps, Ao, EqualPower, Rzf, Pso };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct ExperimentConfig {
  int users = 0;     // K
  int antennas = 0;  // N
  std::vector<double> snr_db_list;
  std::vector<Method> methods;
  int trials = 1;
  CsiModel csi = CsiModel::perfect();
  PrecoderKind kind = PrecoderKind::Rif;
  std::uint64_t seed = 0;
  McnSpsOptions optimizer{};

  double occupancy_percent() const { return 100.0 * users / antennas; }
};

// Strict JSON loader for ExperimentConfig; unknown keys are rejected with a
// field diagnostic.
ExperimentConfig load_experiment_config(const std::string& path);
ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& origin = "<config>");

struct TrialRecord {
  int trial = 0;
  std::uint64_t seed = 0;
  int users = 0;
  int antennas = 0;
  double snr_db = 0.0;
  std::string method;
  std::string csi;
  double sum_rate_bits = 0.0;
  std::optional<double> sum_rate_true_m;
  std::optional<double> objective;
  double runtime_ms = 0.0;
  int iterations = 0;
  std::string converged_flag;
  std::optional<double> r_final;
};

// Monte-Carlo benchmark. Each trial draws a fresh channel from a seed derived
// as cfg.seed xor hash(trial), runs every configured method at every SNR, and
// appends a water-filling pseudo-method row per (trial, snr). Trials may run
// in parallel (IFP_THREADS caps the worker count); the output ordering is
// scheduling independent.
std::vector<TrialRecord> run_benchmark(const ExperimentConfig& cfg);

std::string csv_header();
void write_csv(std::ostream& out, const std::vector<TrialRecord>& records);

struct ConvergenceTrace {
  std::vector<RaStep> steps;
  ConvergedFlag flag = ConvergedFlag::IterationCap;
  IntMatrix A;
};

// Per-iteration fixed-point telemetry for the integer matrix derived at
// d_init.
ConvergenceTrace run_convergence_trace(const Eigen::MatrixXd& channel, double rho, PrecoderKind kind,
                                       const PowerVector& d_init, double tolerance = 1e-8, int iteration_cap = 5000);

// Exhaustive small-instance reference search: every full-rank integer matrix
// with entries in [-a_bound, a_bound] (deduplicated by A A^T) crossed with a
// log-uniform allocation grid of `grid_points` per free dimension over
// log d in [-2, 2]. K <= 3 only.
SolveOutcome run_oracle(const Eigen::MatrixXd& M, double rho, int grid_points, int a_bound);

}  // namespace ifp
