#include "ifp/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

namespace ifp {

namespace {

constexpr double kRankTolerance = 1e-12;

// QR with a positive diagonal in R, so size-reduction quotients are
// well defined.
void positive_qr(const Eigen::MatrixXd& m, Eigen::MatrixXd& q, Eigen::MatrixXd& r) {
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  q = qr.householderQ();
  r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (int i = 0; i < r.rows(); ++i) {
    if (r(i, i) < 0) {
      r.row(i) = -r.row(i);
      q.col(i) = -q.col(i);
    }
  }
}

// Full-rank test relative to the Hadamard bound, in the log domain: the
// basis is accepted when |det| > 1e-12 * prod ||col_i||. Invariant under
// per-column scaling, so well-conditioned but unevenly scaled bases pass.
void check_full_rank(const Eigen::MatrixXd& basis, const Eigen::MatrixXd& r) {
  const int n = static_cast<int>(basis.cols());
  if (!basis.allFinite()) throw SingularBasis("basis has non-finite entries");
  double log_det = 0.0;
  for (int i = 0; i < n; ++i) {
    const double pivot = std::abs(r(i, i));
    if (pivot == 0.0) throw SingularBasis();
    log_det += std::log(pivot);
  }
  const double log_hadamard = basis.colwise().norm().array().log().sum();
  if (!(log_det > std::log(kRankTolerance) + log_hadamard)) {
    throw SingularBasis();
  }
}

int swap_cap(const Eigen::MatrixXd& basis) {
  const int n = static_cast<int>(basis.cols());
  const double max_abs = std::max(basis.cwiseAbs().maxCoeff(), 1e-12);
  const int bits = std::max(1, static_cast<int>(std::ceil(std::log2(std::max(2.0, max_abs / 1e-12)))));
  return 10 * n * n * bits;
}

using int128 = __int128;

int128 abs128(int128 x) { return x < 0 ? -x : x; }

constexpr int128 kOverflowGuard = int128(1) << 120;

}  // namespace

std::int64_t integer_abs_det(const IntMatrix& m) {
  const int n = static_cast<int>(m.rows());
  if (m.cols() != n) throw DimensionMismatch("determinant requires a square matrix");
  std::vector<int128> a(static_cast<size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a[static_cast<size_t>(i) * n + j] = m(i, j);

  // Fraction-free Bareiss elimination; every division is exact.
  int128 prev = 1;
  int sign = 1;
  for (int k = 0; k < n - 1; ++k) {
    if (a[static_cast<size_t>(k) * n + k] == 0) {
      int pivot = -1;
      for (int i = k + 1; i < n; ++i) {
        if (a[static_cast<size_t>(i) * n + k] != 0) {
          pivot = i;
          break;
        }
      }
      if (pivot < 0) return 0;
      for (int j = 0; j < n; ++j) std::swap(a[static_cast<size_t>(k) * n + j], a[static_cast<size_t>(pivot) * n + j]);
      sign = -sign;
    }
    for (int i = k + 1; i < n; ++i) {
      for (int j = k + 1; j < n; ++j) {
        const int128 x = a[static_cast<size_t>(i) * n + j];
        const int128 y = a[static_cast<size_t>(k) * n + k];
        const int128 u = a[static_cast<size_t>(i) * n + k];
        const int128 v = a[static_cast<size_t>(k) * n + j];
        if (abs128(x) > kOverflowGuard || abs128(y) > kOverflowGuard || abs128(u) > kOverflowGuard ||
            abs128(v) > kOverflowGuard) {
          throw NonConvergence("integer determinant overflow");
        }
        a[static_cast<size_t>(i) * n + j] = (x * y - u * v) / prev;
      }
      a[static_cast<size_t>(i) * n + k] = 0;
    }
    prev = a[static_cast<size_t>(k) * n + k];
  }
  int128 det = a[static_cast<size_t>(n - 1) * n + (n - 1)] * sign;
  det = abs128(det);
  if (det > std::numeric_limits<std::int64_t>::max()) throw NonConvergence("integer determinant overflow");
  return static_cast<std::int64_t>(det);
}

ReductionResult lll_reduce(const Eigen::MatrixXd& basis, double delta) {
  const int n = static_cast<int>(basis.cols());
  if (basis.rows() != n) throw DimensionMismatch("lll_reduce requires a square basis");
  if (!(delta > 0.25 && delta <= 1.0)) throw std::invalid_argument("delta must lie in (1/4, 1]");

  Eigen::MatrixXd q, r;
  positive_qr(basis, q, r);
  check_full_rank(basis, r);

  IntMatrix u = IntMatrix::Identity(n, n);
  ReductionResult result;
  const int cap = swap_cap(basis);

  int i = 1;
  while (i < n) {
    // Size-reduce column i against all earlier columns.
    for (int k = i - 1; k >= 0; --k) {
      const long long quot = std::llround(r(k, i) / r(k, k));
      if (quot != 0) {
        r.col(i).head(k + 1) -= static_cast<double>(quot) * r.col(k).head(k + 1);
        u.col(i) -= quot * u.col(k);
        ++result.size_reductions;
        if (quot > 0) ++result.positive_quotients;
      }
    }
    if (delta * r(i - 1, i - 1) * r(i - 1, i - 1) > r(i, i) * r(i, i) + r(i - 1, i) * r(i - 1, i)) {
      if (++result.swaps > cap) {
        throw NonConvergence("LLL swap count exceeded its cap; numerical breakdown");
      }
      r.col(i - 1).swap(r.col(i));
      u.col(i - 1).swap(u.col(i));
      // Givens rotation restores the triangular form after the swap.
      const double a = r(i - 1, i - 1);
      const double b = r(i, i - 1);
      const double nrm = std::hypot(a, b);
      const double c = a / nrm;
      const double s = b / nrm;
      for (int j = i - 1; j < n; ++j) {
        const double x = r(i - 1, j);
        const double y = r(i, j);
        r(i - 1, j) = c * x + s * y;
        r(i, j) = -s * x + c * y;
      }
      r(i, i - 1) = 0.0;
      for (int row = 0; row < n; ++row) {
        const double x = q(row, i - 1);
        const double y = q(row, i);
        q(row, i - 1) = c * x + s * y;
        q(row, i) = -s * x + c * y;
      }
      if (r(i, i) < 0) {
        r.row(i) = -r.row(i);
        q.col(i) = -q.col(i);
      }
      i = std::max(i - 1, 1);
    } else {
      ++i;
    }
  }

  result.reduced = q * r;
  result.transform = u;

  if (integer_abs_det(u) != 1) {
    throw NonConvergence("LLL transform is not unimodular; numerical breakdown");
  }
  const double err = (basis * u.cast<double>() - result.reduced).cwiseAbs().maxCoeff();
  if (!(err <= 1e-8)) {
    throw NonConvergence("LLL transform validation failed; numerical breakdown");
  }
  return result;
}

IntMatrix solve_sivp_unimodular(const Eigen::MatrixXd& basis, double delta) {
  return lll_reduce(basis, delta).transform;
}

bool verify_lll_reduced(const Eigen::MatrixXd& basis, double delta, double tol) {
  const int n = static_cast<int>(basis.cols());
  if (basis.rows() != n) throw DimensionMismatch("verify_lll_reduced requires a square basis");
  Eigen::MatrixXd q, r;
  positive_qr(basis, q, r);
  check_full_rank(basis, r);

  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::abs(r(i, j) / r(i, i)) > 0.5 + tol) return false;
    }
  }
  for (int i = 0; i + 1 < n; ++i) {
    const double lhs = delta * r(i, i) * r(i, i);
    const double rhs = r(i, i + 1) * r(i, i + 1) + r(i + 1, i + 1) * r(i + 1, i + 1);
    if (lhs > rhs + tol * r(i, i) * r(i, i)) return false;
  }
  return true;
}

namespace {

// Exact rank of a set of small integer vectors via fraction-free elimination.
int integer_rank(const std::vector<Eigen::VectorXi>& vecs) {
  if (vecs.empty()) return 0;
  const int rows = static_cast<int>(vecs.size());
  const int cols = static_cast<int>(vecs[0].size());
  std::vector<int128> a(static_cast<size_t>(rows) * cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) a[static_cast<size_t>(i) * cols + j] = vecs[i][j];

  int rank = 0;
  for (int col = 0; col < cols && rank < rows; ++col) {
    int pivot = -1;
    for (int i = rank; i < rows; ++i) {
      if (a[static_cast<size_t>(i) * cols + col] != 0) {
        pivot = i;
        break;
      }
    }
    if (pivot < 0) continue;
    for (int j = 0; j < cols; ++j) std::swap(a[static_cast<size_t>(rank) * cols + j], a[static_cast<size_t>(pivot) * cols + j]);
    const int128 p = a[static_cast<size_t>(rank) * cols + col];
    for (int i = rank + 1; i < rows; ++i) {
      const int128 f = a[static_cast<size_t>(i) * cols + col];
      if (f == 0) continue;
      for (int j = col; j < cols; ++j) {
        a[static_cast<size_t>(i) * cols + j] = a[static_cast<size_t>(i) * cols + j] * p - f * a[static_cast<size_t>(rank) * cols + j];
      }
    }
    ++rank;
  }
  return rank;
}

bool lex_less(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
  for (int i = 0; i < a.size(); ++i) {
    if (a[i] != b[i]) return a[i] < b[i];
  }
  return false;
}

}  // namespace

std::vector<double> successive_minima_bruteforce(const Eigen::MatrixXd& basis, int coeff_bound) {
  const int n = static_cast<int>(basis.cols());
  if (n > 4) throw DimensionTooLarge("brute-force successive minima support K <= 4 only");
  if (basis.rows() != n) throw DimensionMismatch("successive_minima_bruteforce requires a square basis");
  if (coeff_bound < 1) throw std::invalid_argument("coeff_bound must be >= 1");
  {
    Eigen::MatrixXd q, r;
    positive_qr(basis, q, r);
    check_full_rank(basis, r);
  }

  struct Candidate {
    double norm2;
    Eigen::VectorXi coeffs;
  };
  std::vector<Candidate> candidates;
  const int range = 2 * coeff_bound + 1;
  long long total = 1;
  for (int i = 0; i < n; ++i) total *= range;

  Eigen::VectorXi z(n);
  for (long long idx = 0; idx < total; ++idx) {
    long long rem = idx;
    for (int i = 0; i < n; ++i) {
      z[i] = static_cast<int>(rem % range) - coeff_bound;
      rem /= range;
    }
    // Skip zero and canonicalize sign: first nonzero coefficient positive.
    int first_nonzero = -1;
    for (int i = 0; i < n; ++i) {
      if (z[i] != 0) {
        first_nonzero = i;
        break;
      }
    }
    if (first_nonzero < 0 || z[first_nonzero] < 0) continue;
    const double norm2 = (basis * z.cast<double>()).squaredNorm();
    candidates.push_back({norm2, z});
  }

  std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
    if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
    return lex_less(a.coeffs, b.coeffs);
  });

  std::vector<Eigen::VectorXi> picked;
  std::vector<double> minima;
  for (const Candidate& c : candidates) {
    if (static_cast<int>(picked.size()) == n) break;
    picked.push_back(c.coeffs);
    if (integer_rank(picked) == static_cast<int>(picked.size())) {
      minima.push_back(std::sqrt(c.norm2));
    } else {
      picked.pop_back();
    }
  }
  if (static_cast<int>(minima.size()) != n) {
    throw NonConvergence("enumeration bound too small to find independent vectors");
  }
  return minima;
}

}  // namespace ifp
