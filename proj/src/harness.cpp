#include "ifp/harness.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>
#include <unordered_map>

#include <json.hpp>

#include "ifp/rate.hpp"
#include "ifp/rng.hpp"

namespace ifp {

namespace {

constexpr std::uint64_t kEstimateTag = 0x455354494dULL;
constexpr std::uint64_t kMcnTag = 0x4d434eULL;
constexpr std::uint64_t kPsoTag = 0x50534fULL;
constexpr double kOracleLogRange = 2.0;

int worker_count() {
  if (const char* env = std::getenv("IFP_THREADS")) {
    const int parsed = std::atoi(env);
    if (parsed >= 1) return parsed;
  }
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(int n, const std::function<void(int)>& body) {
  const int workers = std::min(worker_count(), n);
  if (workers <= 1) {
    for (int i = 0; i < n; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> threads;
  threads.reserve(static_cast<size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    threads.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          body(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& t : threads) t.join();
  if (error) std::rethrow_exception(error);
}

double elapsed_ms(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
}

std::string format_number(double x) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", x);
  return buf;
}

}  // namespace

std::string to_string(Method method) {
  switch (method) {
    case Method::McnSps:
      return "MCNSPS";
    case Method::Ao:
      return "AO";
    case Method::EqualPower:
      return "EqualPower";
    case Method::Rzf:
      return "RZF";
    case Method::Pso:
      return "PSO";
  }
  return "?";
}

Method method_from_string(const std::string& name) {
  if (name == "MCNSPS") return Method::McnSps;
  if (name == "AO") return Method::Ao;
  if (name == "EqualPower") return Method::EqualPower;
  if (name == "RZF") return Method::Rzf;
  if (name == "PSO") return Method::Pso;
  throw ConfigError("unknown method '" + name + "'");
}

namespace {

using nlohmann::json;

void reject_unknown_keys(const json& j, const std::vector<std::string>& allowed, const std::string& where) {
  for (const auto& item : j.items()) {
    if (std::find(allowed.begin(), allowed.end(), item.key()) == allowed.end()) {
      throw ConfigError("unknown key '" + item.key() + "' in " + where);
    }
  }
}

CsiModel parse_csi(const json& j, const std::string& origin) {
  if (!j.is_object()) throw ConfigError(origin + ": 'csi' must be an object");
  reject_unknown_keys(j, {"model", "sigma_e2", "sigma_h2"}, origin + ".csi");
  const std::string model = j.value("model", "perfect");
  if (model == "perfect") {
    if (j.contains("sigma_e2") || j.contains("sigma_h2")) {
      throw ConfigError(origin + ".csi: perfect CSI takes no variance parameters");
    }
    return CsiModel::perfect();
  }
  if (!j.contains("sigma_e2")) throw ConfigError(origin + ".csi: missing 'sigma_e2'");
  const double se2 = j.at("sigma_e2").get<double>();
  if (se2 < 0.0) throw ConfigError(origin + ".csi: sigma_e2 must be >= 0");
  if (model == "mmse") {
    if (j.contains("sigma_h2")) throw ConfigError(origin + ".csi: mmse takes no 'sigma_h2'");
    return CsiModel::mmse(se2);
  }
  if (model == "ml") {
    const double sh2 = j.value("sigma_h2", 1.0);
    if (!(sh2 > 0.0)) throw ConfigError(origin + ".csi: sigma_h2 must be > 0");
    return CsiModel::ml(sh2, se2);
  }
  throw ConfigError(origin + ".csi: unknown model '" + model + "'");
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& json_text, const std::string& origin) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError(origin + ": config must be a JSON object");
  reject_unknown_keys(j, {"K", "N", "snr_db_list", "methods", "trials", "csi", "kind", "seed", "optimizer"}, origin);

  ExperimentConfig cfg;
  try {
    cfg.users = j.at("K").get<int>();
    cfg.antennas = j.at("N").get<int>();
    cfg.snr_db_list = j.at("snr_db_list").get<std::vector<double>>();
    for (const auto& name : j.at("methods")) cfg.methods.push_back(method_from_string(name.get<std::string>()));
    cfg.trials = j.at("trials").get<int>();
  } catch (const json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
  if (j.contains("csi")) cfg.csi = parse_csi(j.at("csi"), origin);
  if (j.contains("kind")) {
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "dif") {
      cfg.kind = PrecoderKind::Dif;
    } else if (kind == "rif") {
      cfg.kind = PrecoderKind::Rif;
    } else {
      throw ConfigError(origin + ": unknown kind '" + kind + "'");
    }
  }
  if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("optimizer")) {
    const json& opt = j.at("optimizer");
    reject_unknown_keys(opt, {"r0", "num_rays", "epsilon", "max_iter"}, origin + ".optimizer");
    if (opt.contains("r0")) cfg.optimizer.initial_radius = opt.at("r0").get<double>();
    if (opt.contains("num_rays")) cfg.optimizer.num_rays = opt.at("num_rays").get<int>();
    if (opt.contains("epsilon")) cfg.optimizer.radius_tolerance = opt.at("epsilon").get<double>();
    if (opt.contains("max_iter")) cfg.optimizer.ao.max_outer = opt.at("max_iter").get<int>();
  }

  if (cfg.users < 1 || cfg.antennas < 1) throw ConfigError(origin + ": K and N must be >= 1");
  if (cfg.trials < 1) throw ConfigError(origin + ": trials must be >= 1");
  if (cfg.snr_db_list.empty()) throw ConfigError(origin + ": snr_db_list must be nonempty");
  if (cfg.methods.empty()) throw ConfigError(origin + ": methods must be nonempty");
  if (!(cfg.optimizer.initial_radius > cfg.optimizer.radius_tolerance) || !(cfg.optimizer.radius_tolerance > 0.0)) {
    throw ConfigError(origin + ": optimizer requires r0 > epsilon > 0");
  }
  if (cfg.optimizer.ao.max_outer < 1) throw ConfigError(origin + ": optimizer.max_iter must be >= 1");
  return cfg;
}

ExperimentConfig load_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_experiment_config(buffer.str(), path);
}

namespace {

TrialRecord base_record(const ExperimentConfig& cfg, int trial, std::uint64_t trial_seed, double snr_db) {
  TrialRecord rec;
  rec.trial = trial;
  rec.seed = trial_seed;
  rec.users = cfg.users;
  rec.antennas = cfg.antennas;
  rec.snr_db = snr_db;
  rec.csi = to_string(cfg.csi);
  return rec;
}

}  // namespace

std::vector<TrialRecord> run_benchmark(const ExperimentConfig& cfg) {
  const int snr_count = static_cast<int>(cfg.snr_db_list.size());
  const int method_count = static_cast<int>(cfg.methods.size());
  const int rows_per_trial = snr_count * (method_count + 1);
  std::vector<TrialRecord> records(static_cast<size_t>(cfg.trials) * rows_per_trial);

  parallel_for(cfg.trials, [&](int trial) {
    const std::uint64_t trial_seed = cfg.seed ^ hash64(static_cast<std::uint64_t>(trial));
    const Eigen::MatrixXd h_true = sample_rayleigh(cfg.users, cfg.antennas, trial_seed);
    const Eigen::MatrixXd h_used =
        cfg.csi.is_perfect() ? h_true : estimate_channel(h_true, cfg.csi, substream_seed(trial_seed, kEstimateTag));

    for (int s = 0; s < snr_count; ++s) {
      const double snr_db = cfg.snr_db_list[static_cast<size_t>(s)];
      const double rho = std::pow(10.0, snr_db / 10.0);
      const Eigen::MatrixXd m_true = coupling_input_matrix(h_true, cfg.kind, rho);
      const Eigen::MatrixXd m_opt =
          cfg.csi.is_perfect() ? m_true : coupling_input_matrix(h_used, cfg.kind, rho, cfg.csi);

      for (int mi = 0; mi < method_count; ++mi) {
        TrialRecord rec = base_record(cfg, trial, trial_seed, snr_db);
        const Method method = cfg.methods[static_cast<size_t>(mi)];
        rec.method = to_string(method);
        const auto start = std::chrono::steady_clock::now();
        switch (method) {
          case Method::McnSps: {
            McnSpsOptions opts = cfg.optimizer;
            opts.seed = substream_seed(trial_seed, kMcnTag, static_cast<std::uint64_t>(s));
            const SolveOutcome out = mcn_sps(m_opt, rho, opts);
            rec.runtime_ms = elapsed_ms(start);
            rec.sum_rate_bits = out.sum_rate;
            rec.sum_rate_true_m = sum_rate_high_snr(out.A, out.d.vec(), m_true, rho);
            rec.objective = out.objective;
            rec.iterations = out.iterations;
            rec.converged_flag = to_string(out.flag);
            rec.r_final = out.final_radius;
            break;
          }
          case Method::Ao: {
            const SolveOutcome out = alternating_optimize(m_opt, rho, PowerVector::ones(cfg.users), cfg.optimizer.ao);
            rec.runtime_ms = elapsed_ms(start);
            rec.sum_rate_bits = out.sum_rate;
            rec.sum_rate_true_m = sum_rate_high_snr(out.A, out.d.vec(), m_true, rho);
            rec.objective = out.objective;
            rec.iterations = out.iterations;
            rec.converged_flag = to_string(out.flag);
            break;
          }
          case Method::EqualPower: {
            const EqualPowerResult out = equal_power(m_opt, cfg.optimizer.ao.lll_delta);
            rec.runtime_ms = elapsed_ms(start);
            rec.sum_rate_bits = sum_rate_high_snr(out.A, out.d.vec(), m_opt, rho);
            rec.sum_rate_true_m = sum_rate_high_snr(out.A, out.d.vec(), m_true, rho);
            rec.objective = trace_objective(out.A, out.d.vec(), m_opt);
            break;
          }
          case Method::Rzf: {
            const double rate = rzf_rate(h_used, rho);
            rec.runtime_ms = elapsed_ms(start);
            rec.sum_rate_bits = rate;
            rec.sum_rate_true_m = rzf_rate(h_true, rho);
            const Eigen::MatrixXd m_rzf = coupling_input_matrix(h_used, PrecoderKind::Rif, rho);
            rec.objective = trace_objective(IntMatrix::Identity(cfg.users, cfg.users),
                                            Eigen::VectorXd::Ones(cfg.users), m_rzf);
            break;
          }
          case Method::Pso: {
            PsoOptions opts;
            opts.seed = substream_seed(trial_seed, kPsoTag, static_cast<std::uint64_t>(s));
            opts.lll_delta = cfg.optimizer.ao.lll_delta;
            const SolveOutcome out = pso_optimize(m_opt, rho, opts);
            rec.runtime_ms = elapsed_ms(start);
            rec.sum_rate_bits = out.sum_rate;
            rec.sum_rate_true_m = sum_rate_high_snr(out.A, out.d.vec(), m_true, rho);
            rec.objective = out.objective;
            rec.iterations = out.iterations;
            rec.converged_flag = to_string(out.flag);
            break;
          }
        }
        records[static_cast<size_t>(trial) * rows_per_trial + static_cast<size_t>(s) * (method_count + 1) + mi] = rec;
      }

      TrialRecord wf = base_record(cfg, trial, trial_seed, snr_db);
      wf.method = "WaterFilling";
      const auto start = std::chrono::steady_clock::now();
      wf.sum_rate_bits = waterfilling_upper_bound(h_true, rho);
      wf.runtime_ms = elapsed_ms(start);
      wf.sum_rate_true_m = wf.sum_rate_bits;
      records[static_cast<size_t>(trial) * rows_per_trial + static_cast<size_t>(s) * (method_count + 1) + method_count] =
          wf;
    }
  });
  return records;
}

std::string csv_header() {
  return "trial,seed,K,N,snr_db,method,csi,sum_rate_bits,sum_rate_true_m,objective,runtime_ms,iterations,"
         "converged_flag,r_final";
}

void write_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
  out << csv_header() << '\n';
  for (const TrialRecord& r : records) {
    out << r.trial << ',' << r.seed << ',' << r.users << ',' << r.antennas << ',' << format_number(r.snr_db) << ','
        << r.method << ',' << r.csi << ',' << format_number(r.sum_rate_bits) << ','
        << (r.sum_rate_true_m ? format_number(*r.sum_rate_true_m) : std::string()) << ','
        << (r.objective ? format_number(*r.objective) : std::string()) << ',' << format_number(r.runtime_ms) << ','
        << r.iterations << ',' << r.converged_flag << ',' << (r.r_final ? format_number(*r.r_final) : std::string())
        << '\n';
  }
}

ConvergenceTrace run_convergence_trace(const Eigen::MatrixXd& channel, double rho, PrecoderKind kind,
                                       const PowerVector& d_init, double tolerance, int iteration_cap) {
  const Eigen::MatrixXd m = coupling_input_matrix(channel, kind, rho);
  ConvergenceTrace trace;
  trace.A = d_to_A(m, d_init);
  const Eigen::MatrixXd g = coupling_matrix(trace.A, m);
  const RaResult ra = ra_fixed_point(g, d_init, tolerance, iteration_cap, &trace.steps);
  trace.flag = ra.flag;
  return trace;
}

namespace {

// Deduplicated Gram set for the exhaustive search: one representative A per
// distinct A A^T over full-rank integer matrices with bounded entries.
struct OracleEntry {
  std::array<std::int8_t, 9> a{};
  std::array<double, 6> gram{};  // diagonal first, then doubled off-diagonals
};

const std::vector<OracleEntry>& oracle_entries(int k, int bound) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::vector<OracleEntry>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find({k, bound});
  if (it != cache.end()) return it->second;

  std::vector<OracleEntry> entries;
  std::unordered_map<std::uint64_t, int> seen;
  const int range = 2 * bound + 1;
  const int cells = k * k;
  long long total = 1;
  for (int i = 0; i < cells; ++i) total *= range;

  std::array<int, 9> a{};
  for (long long idx = 0; idx < total; ++idx) {
    long long rem = idx;
    for (int i = 0; i < cells; ++i) {
      a[static_cast<size_t>(i)] = static_cast<int>(rem % range) - bound;
      rem /= range;
    }
    long long det = 0;
    if (k == 2) {
      det = static_cast<long long>(a[0]) * a[3] - static_cast<long long>(a[1]) * a[2];
    } else {
      det = static_cast<long long>(a[0]) * (static_cast<long long>(a[4]) * a[8] - static_cast<long long>(a[5]) * a[7]) -
            static_cast<long long>(a[1]) * (static_cast<long long>(a[3]) * a[8] - static_cast<long long>(a[5]) * a[6]) +
            static_cast<long long>(a[2]) * (static_cast<long long>(a[3]) * a[7] - static_cast<long long>(a[4]) * a[6]);
    }
    if (det == 0) continue;

    // Gram entries (row-wise inner products), packed into a dedup key.
    std::array<int, 6> gram{};
    int slot = 0;
    for (int i = 0; i < k; ++i) {
      int g = 0;
      for (int c = 0; c < k; ++c) g += a[static_cast<size_t>(i * k + c)] * a[static_cast<size_t>(i * k + c)];
      gram[static_cast<size_t>(slot++)] = g;
    }
    for (int i = 0; i < k; ++i) {
      for (int j = i + 1; j < k; ++j) {
        int g = 0;
        for (int c = 0; c < k; ++c) g += a[static_cast<size_t>(i * k + c)] * a[static_cast<size_t>(j * k + c)];
        gram[static_cast<size_t>(slot++)] = g;
      }
    }
    std::uint64_t key = 0;
    for (int i = 0; i < slot; ++i) key = key * 131 + static_cast<std::uint64_t>(gram[static_cast<size_t>(i)] + 64);
    if (!seen.emplace(key, static_cast<int>(entries.size())).second) continue;

    OracleEntry entry;
    for (int i = 0; i < cells; ++i) entry.a[static_cast<size_t>(i)] = static_cast<std::int8_t>(a[static_cast<size_t>(i)]);
    for (int i = 0; i < k; ++i) entry.gram[static_cast<size_t>(i)] = gram[static_cast<size_t>(i)];
    for (int i = k; i < slot; ++i) entry.gram[static_cast<size_t>(i)] = 2.0 * gram[static_cast<size_t>(i)];
    entries.push_back(entry);
  }
  auto [pos, inserted] = cache.emplace(std::make_pair(k, bound), std::move(entries));
  return pos->second;
}

}  // namespace

SolveOutcome run_oracle(const Eigen::MatrixXd& M, double rho, int grid_points, int a_bound) {
  const int k = static_cast<int>(M.rows());
  if (k > 3) throw DimensionTooLarge("oracle search supports K <= 3 only");
  if (k < 2) throw std::invalid_argument("oracle search requires K >= 2");
  if (grid_points < 2 || a_bound < 1) throw std::invalid_argument("oracle grid and bound must be positive");

  const auto& entries = oracle_entries(k, a_bound);
  const int free_dims = k - 1;
  long long grid_total = 1;
  for (int i = 0; i < free_dims; ++i) grid_total *= grid_points;

  double best_objective = std::numeric_limits<double>::infinity();
  int best_entry = -1;
  Eigen::VectorXd best_d;

  Eigen::VectorXd logs(k);
  std::array<double, 6> weights{};
  for (long long g = 0; g < grid_total; ++g) {
    long long rem = g;
    double sum = 0.0;
    for (int i = 0; i < free_dims; ++i) {
      const int cell = static_cast<int>(rem % grid_points);
      rem /= grid_points;
      logs[i] = -kOracleLogRange + 2.0 * kOracleLogRange * cell / (grid_points - 1);
      sum += logs[i];
    }
    logs[free_dims] = -sum;
    const Eigen::VectorXd d = logs.array().exp();

    int slot = 0;
    for (int i = 0; i < k; ++i) weights[static_cast<size_t>(slot++)] = M(i, i) * d[i] * d[i];
    for (int i = 0; i < k; ++i)
      for (int j = i + 1; j < k; ++j) weights[static_cast<size_t>(slot++)] = M(i, j) * d[i] * d[j];

    for (size_t e = 0; e < entries.size(); ++e) {
      double obj = 0.0;
      for (int t = 0; t < slot; ++t) obj += entries[e].gram[static_cast<size_t>(t)] * weights[static_cast<size_t>(t)];
      if (obj < best_objective) {
        best_objective = obj;
        best_entry = static_cast<int>(e);
        best_d = d;
      }
    }
  }

  SolveOutcome out;
  IntMatrix a(k, k);
  for (int i = 0; i < k; ++i)
    for (int j = 0; j < k; ++j) a(i, j) = entries[static_cast<size_t>(best_entry)].a[static_cast<size_t>(i * k + j)];
  out.A = a;
  out.d = gamma_normalize(best_d);
  out.objective = best_objective;
  out.sum_rate = sum_rate_high_snr(a, out.d.vec(), M, rho);
  out.flag = ConvergedFlag::FixedPoint;
  return out;
}

}  // namespace ifp
