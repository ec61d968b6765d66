#include "ifp/channel.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Dense>

#include "ifp/rng.hpp"

namespace ifp {

namespace {

constexpr double kConditionLimit = 1e12;

// SPD inverse through the eigendecomposition; rejects matrices whose
// condition number exceeds kConditionLimit.
Eigen::MatrixXd spd_inverse(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m);
  const Eigen::VectorXd& ev = es.eigenvalues();
  const double lo = ev.minCoeff();
  const double hi = ev.maxCoeff();
  if (!(lo > 0.0) || hi / lo > kConditionLimit) throw SingularGram();
  Eigen::MatrixXd inv = es.eigenvectors() * ev.cwiseInverse().asDiagonal() * es.eigenvectors().transpose();
  return 0.5 * (inv + inv.transpose());
}

Eigen::MatrixXd inner_matrix(const Eigen::MatrixXd& channel, PrecoderKind kind, double rho, const CsiModel& csi) {
  if (!(rho > 0.0)) throw std::invalid_argument("rho must be positive");
  const int users = static_cast<int>(channel.rows());
  Eigen::MatrixXd inner = channel * channel.transpose();
  switch (csi.kind) {
    case CsiModel::Kind::Perfect:
      if (kind == PrecoderKind::Rif) inner += (users / rho) * Eigen::MatrixXd::Identity(users, users);
      break;
    case CsiModel::Kind::Mmse:
      inner += users * csi.sigma_e2 * Eigen::MatrixXd::Identity(users, users);
      if (kind == PrecoderKind::Rif) inner += (users / rho) * Eigen::MatrixXd::Identity(users, users);
      break;
    case CsiModel::Kind::Ml: {
      if (!(csi.sigma_h2 > 0.0)) throw std::invalid_argument("sigma_h2 must be positive for the ML model");
      const double shrink = csi.sigma_h2 / (csi.sigma_h2 + csi.sigma_e2);
      inner *= shrink;
      inner += users * csi.sigma_e2 * Eigen::MatrixXd::Identity(users, users);
      if (kind == PrecoderKind::Rif) {
        inner += users * (csi.sigma_h2 + csi.sigma_e2) / (rho * csi.sigma_h2) * Eigen::MatrixXd::Identity(users, users);
      }
      break;
    }
  }
  return inner;
}

}  // namespace

std::string to_string(PrecoderKind kind) { return kind == PrecoderKind::Dif ? "dif" : "rif"; }

std::string to_string(const CsiModel& csi) {
  std::ostringstream os;
  switch (csi.kind) {
    case CsiModel::Kind::Perfect:
      os << "perfect";
      break;
    case CsiModel::Kind::Mmse:
      os << "mmse_se2_" << csi.sigma_e2;
      break;
    case CsiModel::Kind::Ml:
      os << "ml_sh2_" << csi.sigma_h2 << "_se2_" << csi.sigma_e2;
      break;
  }
  return os.str();
}

Eigen::MatrixXd sample_rayleigh(int users, int antennas, std::uint64_t seed) {
  if (users < 1 || antennas < 1) throw std::invalid_argument("channel dimensions must be positive");
  RngStream rng(substream_seed(seed, 0x52617965ULL));
  Eigen::MatrixXd h(users, antennas);
  for (int i = 0; i < users; ++i) {
    for (int j = 0; j < antennas; ++j) {
      const double x = rng.normal();
      const double y = rng.normal();
      h(i, j) = std::sqrt(0.5 * (x * x + y * y));
    }
  }
  return h;
}

Eigen::MatrixXd complex_to_real_embedding(const Eigen::MatrixXcd& complex_channel) {
  const Eigen::Index rows = complex_channel.rows();
  const Eigen::Index cols = complex_channel.cols();
  if (!complex_channel.allFinite()) throw std::invalid_argument("channel has non-finite entries");
  Eigen::MatrixXd out(2 * rows, 2 * cols);
  out.topLeftCorner(rows, cols) = complex_channel.real();
  out.topRightCorner(rows, cols) = -complex_channel.imag();
  out.bottomLeftCorner(rows, cols) = complex_channel.imag();
  out.bottomRightCorner(rows, cols) = complex_channel.real();
  return out;
}

double estimation_error_variance(int users, double sigma_z2, double n_train, double e_train) {
  if (users < 1 || !(sigma_z2 > 0.0) || !(n_train > 0.0) || !(e_train > 0.0)) {
    throw std::invalid_argument("estimation_error_variance arguments must be positive");
  }
  return users * sigma_z2 / (n_train * e_train);
}

Eigen::MatrixXd estimate_channel(const Eigen::MatrixXd& true_channel, const CsiModel& csi, std::uint64_t seed) {
  if (csi.is_perfect()) throw PerfectCsiNoOp();
  RngStream rng(substream_seed(seed, 0x455354ULL));
  const double sigma_e = std::sqrt(csi.sigma_e2);
  Eigen::MatrixXd noise(true_channel.rows(), true_channel.cols());
  for (Eigen::Index i = 0; i < noise.rows(); ++i)
    for (Eigen::Index j = 0; j < noise.cols(); ++j) noise(i, j) = sigma_e * rng.normal();
  return csi.kind == CsiModel::Kind::Mmse ? (true_channel - noise).eval() : (true_channel + noise).eval();
}

Eigen::MatrixXd coupling_input_matrix(const Eigen::MatrixXd& channel, PrecoderKind kind, double rho,
                                      const CsiModel& csi) {
  return spd_inverse(inner_matrix(channel, kind, rho, csi));
}

Eigen::MatrixXd build_precoder(const Eigen::MatrixXd& channel, const Eigen::VectorXd& d, const IntMatrix& A,
                               PrecoderKind kind, const CsiModel& csi, double rho) {
  const int users = static_cast<int>(channel.rows());
  if (d.size() != users || A.rows() != users || A.cols() != users) {
    throw DimensionMismatch("precoder inputs must agree on the user count");
  }
  const Eigen::MatrixXd scaled = d.asDiagonal() * A.cast<double>();
  const Eigen::MatrixXd unnormalized = channel.transpose() * spd_inverse(inner_matrix(channel, kind, rho, csi)) * scaled;
  const double power = unnormalized.squaredNorm();
  if (!(power > 0.0)) throw ZeroPrecoder();
  const double eta = std::sqrt(power / rho);
  return unnormalized / eta;
}

}  // namespace ifp
