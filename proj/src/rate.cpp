#include "ifp/rate.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Dense>

namespace ifp {

namespace {

void check_square_match(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M) {
  const Eigen::Index k = d.size();
  if (A.rows() != k || A.cols() != k || M.rows() != k || M.cols() != k) {
    throw DimensionMismatch("objective inputs must be K x K with a K-vector d");
  }
}

double log2_positive(double x) { return std::max(0.0, std::log2(x)); }

}  // namespace

double trace_objective(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M) {
  check_square_match(A, d, M);
  const Eigen::MatrixXd gram = (A * A.transpose()).cast<double>();
  return d.dot(gram.cwiseProduct(M) * d);
}

double trace_objective_factor_form(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M) {
  check_square_match(A, d, M);
  Eigen::LLT<Eigen::MatrixXd> llt(M);
  if (llt.info() != Eigen::Success) throw NonSpdCoupling("factor form requires SPD M");
  const Eigen::MatrixXd t = llt.matrixU();
  return (t * d.asDiagonal() * A.cast<double>()).squaredNorm();
}

double sum_rate_high_snr(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const double objective = trace_objective(A, d, M);
  const double log_prod = d.array().log().sum();
  const double k = static_cast<double>(d.size());
  return 0.5 * k * log2_positive(rho * std::exp(2.0 * log_prod) / objective);
}

RateReport evaluate_rates(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M, double rho) {
  RateReport report;
  report.objective = trace_objective(A, d, M);
  report.sum_rate_bits = sum_rate_high_snr(A, d, M, rho);
  return report;
}

RateReport evaluate_rates(const IntMatrix& A, const Eigen::VectorXd& d, const Eigen::MatrixXd& M, double rho,
                          const Eigen::MatrixXd& channel, const Eigen::MatrixXd& precoder) {
  RateReport report = evaluate_rates(A, d, M, rho);
  report.per_user = per_user_rate(A, channel, precoder, rho);
  return report;
}

std::vector<double> per_user_rate(const IntMatrix& A, const Eigen::MatrixXd& channel, const Eigen::MatrixXd& precoder,
                                  double rho) {
  const Eigen::Index k = channel.rows();
  if (A.rows() != k || A.cols() != k || precoder.cols() != k || precoder.rows() != channel.cols()) {
    throw DimensionMismatch("per_user_rate inputs are inconsistent");
  }
  const Eigen::MatrixXd effective = channel * precoder;  // row i is the i-th effective channel
  std::vector<double> rates(static_cast<size_t>(k));
  for (Eigen::Index i = 0; i < k; ++i) {
    const Eigen::VectorXd h = effective.row(i).transpose();
    const Eigen::VectorXd a = A.row(i).transpose().cast<double>();
    const double c = rho / (rho * h.squaredNorm() + 1.0);
    const double quad = a.squaredNorm() - c * std::pow(a.dot(h), 2);
    rates[static_cast<size_t>(i)] = log2_positive(1.0 / quad);
  }
  return rates;
}

WaterfillingResult waterfilling_allocation(const Eigen::MatrixXd& channel, double rho) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const double k = static_cast<double>(channel.rows());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(channel * channel.transpose());
  Eigen::VectorXd gains = es.eigenvalues().reverse();

  WaterfillingResult result;
  result.mode_gains = gains;
  result.powers = Eigen::VectorXd::Zero(gains.size());

  const double gain_floor = std::max(gains.maxCoeff(), 0.0) * 1e-14;
  std::vector<double> inverse_gain;
  for (Eigen::Index i = 0; i < gains.size(); ++i) {
    if (gains[i] > gain_floor) inverse_gain.push_back(k / (rho * gains[i]));
  }
  if (inverse_gain.empty()) return result;

  // Water level mu: powers are max(0, mu - K/(rho lambda)) and must sum to K.
  const auto total_power = [&](double mu) {
    double sum = 0.0;
    for (double c : inverse_gain) sum += std::max(0.0, mu - c);
    return sum;
  };
  double lo = 0.0;
  double hi = *std::max_element(inverse_gain.begin(), inverse_gain.end()) + k + 1.0;
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (total_power(mid) < k ? lo : hi) = mid;
  }
  const double mu = 0.5 * (lo + hi);
  result.water_level = mu;

  double rate = 0.0;
  size_t active = 0;
  for (Eigen::Index i = 0; i < gains.size(); ++i) {
    if (gains[i] <= gain_floor) continue;
    const double w = std::max(0.0, mu - inverse_gain[active++]);
    result.powers[i] = w;
    rate += 0.5 * std::log2(1.0 + (rho / k) * gains[i] * w);
  }
  result.rate_bits = rate;
  return result;
}

double waterfilling_upper_bound(const Eigen::MatrixXd& channel, double rho) {
  return waterfilling_allocation(channel, rho).rate_bits;
}

}  // namespace ifp
