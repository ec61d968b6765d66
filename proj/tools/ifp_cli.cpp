#include <fstream>
#include <iostream>

#include <CLI11.hpp>
#include <json.hpp>

#include "ifp/harness.hpp"
#include "ifp/matrix_io.hpp"
#include "ifp/rate.hpp"

namespace {

using nlohmann::json;

json matrix_to_json(const Eigen::MatrixXd& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json int_matrix_to_json(const ifp::IntMatrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(row);
  }
  return rows;
}

json outcome_to_json(const ifp::SolveOutcome& out) {
  json j;
  j["A"] = int_matrix_to_json(out.A);
  j["d"] = std::vector<double>(out.d.vec().data(), out.d.vec().data() + out.d.size());
  j["objective"] = out.objective;
  j["sum_rate_bits"] = out.sum_rate;
  j["iterations"] = out.iterations;
  j["converged_flag"] = ifp::to_string(out.flag);
  return j;
}

ifp::CsiModel csi_from_flags(const std::string& model, double sigma_e2, double sigma_h2) {
  if (model == "perfect") return ifp::CsiModel::perfect();
  if (model == "mmse") return ifp::CsiModel::mmse(sigma_e2);
  if (model == "ml") return ifp::CsiModel::ml(sigma_h2, sigma_e2);
  throw ifp::ConfigError("unknown CSI model '" + model + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Integer-forcing precoding optimization and benchmarking"};
  app.require_subcommand(1);

  // lll
  std::string basis_path;
  double delta = 0.75;
  auto* lll = app.add_subcommand("lll", "LLL-reduce a basis read from a matrix file");
  lll->add_option("--basis", basis_path, "whitespace-separated matrix file")->required();
  lll->add_option("--delta", delta, "Lovasz constant in (1/4, 1]");

  // optimize
  std::string channel_path;
  double snr_db = 20.0;
  std::string kind_name = "rif";
  std::string csi_model = "perfect";
  double sigma_e2 = 0.0;
  double sigma_h2 = 1.0;
  std::uint64_t seed = 0;
  std::string method_name = "mcnsps";
  double r0 = 10.0;
  int num_rays = 0;
  double radius_eps = 1e-4;
  int max_iter = 100;
  auto* optimize = app.add_subcommand("optimize", "Joint (A, d) optimization for a channel file");
  optimize->add_option("--channel", channel_path, "channel matrix file")->required();
  optimize->add_option("--snr-db", snr_db, "SNR in dB");
  optimize->add_option("--kind", kind_name, "dif or rif")->check(CLI::IsMember({"dif", "rif"}));
  optimize->add_option("--csi-model", csi_model, "perfect, mmse or ml")->check(CLI::IsMember({"perfect", "mmse", "ml"}));
  optimize->add_option("--sigma-e2", sigma_e2, "estimation error variance");
  optimize->add_option("--sigma-h2", sigma_h2, "channel variance (ml model)");
  optimize->add_option("--seed", seed, "random seed");
  optimize->add_option("--method", method_name, "mcnsps or ao")->check(CLI::IsMember({"mcnsps", "ao"}));
  optimize->add_option("--r0", r0, "initial search radius");
  optimize->add_option("--num-rays", num_rays, "rays per round (0 = 2K)");
  optimize->add_option("--radius-eps", radius_eps, "terminal search radius");
  optimize->add_option("--max-iter", max_iter, "alternating optimization cap");

  // benchmark
  std::string config_path;
  std::string out_path;
  auto* benchmark = app.add_subcommand("benchmark", "Monte-Carlo benchmark driven by a JSON config");
  benchmark->add_option("--config", config_path, "JSON experiment config")->required();
  benchmark->add_option("--out", out_path, "output CSV path")->required();

  // trace
  std::string trace_channel;
  double trace_snr_db = 0.0;
  std::string trace_out;
  std::string trace_kind = "rif";
  auto* trace = app.add_subcommand("trace", "Per-iteration fixed-point telemetry for a channel file");
  trace->add_option("--channel", trace_channel, "channel matrix file")->required();
  trace->add_option("--snr-db", trace_snr_db, "SNR in dB");
  trace->add_option("--out", trace_out, "output CSV path")->required();
  trace->add_option("--kind", trace_kind, "dif or rif")->check(CLI::IsMember({"dif", "rif"}));

  // oracle
  std::string oracle_channel;
  double oracle_snr_db = 20.0;
  int grid = 61;
  int a_bound = 2;
  std::string oracle_kind = "rif";
  auto* oracle = app.add_subcommand("oracle", "Exhaustive small-instance reference search");
  oracle->add_option("--channel", oracle_channel, "channel matrix file")->required();
  oracle->add_option("--snr-db", oracle_snr_db, "SNR in dB");
  oracle->add_option("--grid", grid, "grid points per free dimension");
  oracle->add_option("--a-bound", a_bound, "integer entry bound");
  oracle->add_option("--kind", oracle_kind, "dif or rif")->check(CLI::IsMember({"dif", "rif"}));

  CLI11_PARSE(app, argc, argv);

  try {
    if (lll->parsed()) {
      const Eigen::MatrixXd basis = ifp::read_matrix(basis_path);
      const ifp::ReductionResult result = ifp::lll_reduce(basis, delta);
      std::cout << "reduced basis:\n";
      ifp::write_matrix(std::cout, result.reduced);
      std::cout << "transform:\n";
      ifp::write_matrix(std::cout, result.transform.cast<double>());
      std::cout << "swaps: " << result.swaps << "\nsize_reductions: " << result.size_reductions << "\n";
    } else if (optimize->parsed()) {
      const Eigen::MatrixXd channel = ifp::read_matrix(channel_path);
      const double rho = std::pow(10.0, snr_db / 10.0);
      const ifp::PrecoderKind kind = kind_name == "dif" ? ifp::PrecoderKind::Dif : ifp::PrecoderKind::Rif;
      const ifp::CsiModel csi = csi_from_flags(csi_model, sigma_e2, sigma_h2);
      const Eigen::MatrixXd m = ifp::coupling_input_matrix(channel, kind, rho, csi);
      ifp::SolveOutcome out;
      if (method_name == "ao") {
        ifp::AoOptions ao;
        ao.max_outer = max_iter;
        out = ifp::alternating_optimize(m, rho, ifp::PowerVector::ones(static_cast<int>(m.rows())), ao);
      } else {
        ifp::McnSpsOptions opts;
        opts.initial_radius = r0;
        opts.num_rays = num_rays;
        opts.radius_tolerance = radius_eps;
        opts.ao.max_outer = max_iter;
        opts.seed = seed;
        out = ifp::mcn_sps(m, rho, opts);
      }
      json j = outcome_to_json(out);
      j["snr_db"] = snr_db;
      j["kind"] = kind_name;
      std::cout << j.dump(2) << "\n";
    } else if (benchmark->parsed()) {
      const ifp::ExperimentConfig cfg = ifp::load_experiment_config(config_path);
      std::cerr << "occupancy: " << cfg.occupancy_percent() << "%\n";
      const auto records = ifp::run_benchmark(cfg);
      std::ofstream out(out_path);
      if (!out) throw ifp::ConfigError("cannot open output file '" + out_path + "'");
      ifp::write_csv(out, records);
      std::cerr << "wrote " << records.size() << " rows to " << out_path << "\n";
    } else if (trace->parsed()) {
      const Eigen::MatrixXd channel = ifp::read_matrix(trace_channel);
      const double rho = std::pow(10.0, trace_snr_db / 10.0);
      const ifp::PrecoderKind kind = trace_kind == "dif" ? ifp::PrecoderKind::Dif : ifp::PrecoderKind::Rif;
      const auto result =
          ifp::run_convergence_trace(channel, rho, kind, ifp::PowerVector::ones(static_cast<int>(channel.rows())));
      std::ofstream out(trace_out);
      if (!out) throw ifp::ConfigError("cannot open output file '" + trace_out + "'");
      out << "iteration,hilbert_step,objective\n";
      for (const auto& step : result.steps) {
        out << step.iteration << ',' << step.hilbert_step << ',' << step.objective << '\n';
      }
      std::cerr << "flag: " << ifp::to_string(result.flag) << ", " << result.steps.size() << " iterations\n";
    } else if (oracle->parsed()) {
      const Eigen::MatrixXd channel = ifp::read_matrix(oracle_channel);
      const double rho = std::pow(10.0, oracle_snr_db / 10.0);
      const ifp::PrecoderKind kind = oracle_kind == "dif" ? ifp::PrecoderKind::Dif : ifp::PrecoderKind::Rif;
      const Eigen::MatrixXd m = ifp::coupling_input_matrix(channel, kind, rho);
      const ifp::SolveOutcome out = ifp::run_oracle(m, rho, grid, a_bound);
      json j = outcome_to_json(out);
      j["grid"] = grid;
      j["a_bound"] = a_bound;
      std::cout << j.dump(2) << "\n";
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
