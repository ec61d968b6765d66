#include <doctest.h>

#include <cmath>

#include "ifp/channel.hpp"
#include "ifp/optimizer.hpp"
#include "ifp/rate.hpp"
#include "test_util.hpp"

using namespace ifp;

namespace {

// Minimum objective over all full-rank 3x3 integer matrices with entries in
// [-2, 2] at a fixed allocation.
double bruteforce_integer_objective(const Eigen::MatrixXd& m, const Eigen::VectorXd& d) {
  double best = std::numeric_limits<double>::infinity();
  std::array<int, 9> a{};
  for (long long idx = 0; idx < 1953125; ++idx) {  // 5^9
    long long rem = idx;
    for (int i = 0; i < 9; ++i) {
      a[static_cast<size_t>(i)] = static_cast<int>(rem % 5) - 2;
      rem /= 5;
    }
    const long long det =
        static_cast<long long>(a[0]) * (a[4] * a[8] - a[5] * a[7]) -
        static_cast<long long>(a[1]) * (a[3] * a[8] - a[5] * a[6]) +
        static_cast<long long>(a[2]) * (a[3] * a[7] - a[4] * a[6]);
    if (det == 0) continue;
    double obj = 0.0;
    for (int i = 0; i < 3; ++i) {
      for (int j = 0; j < 3; ++j) {
        int gram = 0;
        for (int c = 0; c < 3; ++c) gram += a[static_cast<size_t>(i * 3 + c)] * a[static_cast<size_t>(j * 3 + c)];
        obj += gram * m(i, j) * d[i] * d[j];
      }
    }
    best = std::min(best, obj);
  }
  return best;
}

}  // namespace

TEST_SUITE_BEGIN("optimizer");

TEST_CASE("hilbert metric") {
  CHECK(hilbert_metric(Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 4)) == doctest::Approx(0.0));
  CHECK(hilbert_metric(Eigen::Vector2d(1, 2), Eigen::Vector2d(2, 1)) == doctest::Approx(std::log(4.0)));
  CHECK(hilbert_metric(Eigen::Vector3d(1, 1, 1), Eigen::Vector3d(1, 1, 1)) == doctest::Approx(0.0));
  CHECK_THROWS_AS(hilbert_metric(Eigen::Vector2d(1, -2), Eigen::Vector2d(2, 1)), NonPositiveInput);
}

TEST_CASE("hilbert metric axioms") {
  RngStream rng(81);
  const auto random_positive = [&](int k) {
    Eigen::VectorXd v(k);
    for (int i = 0; i < k; ++i) v[i] = std::exp(rng.uniform(-2.0, 2.0));
    return v;
  };
  for (int trial = 0; trial < 10000; ++trial) {
    const int k = 2 + trial % 5;
    const Eigen::VectorXd x = random_positive(k);
    const Eigen::VectorXd y = random_positive(k);
    const Eigen::VectorXd z = random_positive(k);
    const double dxy = hilbert_metric(x, y);
    CHECK(dxy >= 0.0);
    CHECK(std::abs(dxy - hilbert_metric(y, x)) <= 1e-10);
    CHECK(hilbert_metric(x, 3.7 * x) <= 1e-10);
    CHECK(hilbert_metric(x, z) <= dxy + hilbert_metric(y, z) + 1e-10);
    CHECK(std::abs(hilbert_metric(rng.uniform(0.1, 5.0) * x, rng.uniform(0.1, 5.0) * y) - dxy) <= 1e-10);
  }
}

TEST_CASE("gamma normalization") {
  const PowerVector a = gamma_normalize(Eigen::Vector2d(4.0, 1.0));
  CHECK(a[0] == doctest::Approx(2.0));
  CHECK(a[1] == doctest::Approx(0.5));
  CHECK(gamma_normalize(Eigen::Vector3d(1, 1, 1)).vec() == Eigen::Vector3d(1, 1, 1));
  CHECK((gamma_normalize(Eigen::Vector3d(7.3, 7.3, 7.3)).vec() - Eigen::Vector3d(1, 1, 1)).cwiseAbs().maxCoeff() <=
        1e-12);

  RngStream rng(82);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 6;
    Eigen::VectorXd x(k);
    for (int i = 0; i < k; ++i) x[i] = std::exp(rng.uniform(-3.0, 3.0));
    const PowerVector base = gamma_normalize(x);
    const PowerVector scaled = gamma_normalize(rng.uniform(0.01, 100.0) * x);
    CHECK((base.vec() - scaled.vec()).cwiseAbs().maxCoeff() <= 1e-12);
    CHECK(std::abs(std::expm1(base.vec().array().log().sum())) <= 1e-9);
  }
  CHECK_THROWS_AS(gamma_normalize(Eigen::Vector2d(1.0, 0.0)), NonPositiveInput);
}

TEST_CASE("fixed point on symmetric instances") {
  std::vector<RaStep> trace;
  const RaResult at_identity =
      ra_fixed_point(Eigen::MatrixXd::Identity(3, 3), PowerVector::ones(3), 1e-8, 100, &trace);
  CHECK(at_identity.flag == ConvergedFlag::FixedPoint);
  CHECK(at_identity.iterations == 1);
  CHECK((at_identity.d.vec() - Eigen::Vector3d(1, 1, 1)).cwiseAbs().maxCoeff() <= 1e-12);
  CHECK(trace.size() == 1);
  CHECK(trace[0].hilbert_step == doctest::Approx(0.0));

  Eigen::MatrixXd g(2, 2);
  g << 2.0, -1.0,
       -1.0, 2.0;
  const RaResult symmetric = ra_fixed_point(g, PowerVector::ones(2), 1e-8, 100);
  CHECK(symmetric.flag == ConvergedFlag::FixedPoint);
  CHECK((symmetric.d.vec() - Eigen::Vector2d(1, 1)).cwiseAbs().maxCoeff() <= 1e-9);

  CHECK_THROWS_AS(ra_fixed_point(-Eigen::MatrixXd::Identity(2, 2), PowerVector::ones(2), 1e-8, 10), NonSpdCoupling);
}

TEST_CASE("fixed point matches the diagonal closed form") {
  const Eigen::MatrixXd g = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  const RaResult ra = ra_fixed_point(g, 1e-8, 100);
  const PowerVector closed = closed_form_diagonal(g, IntMatrix::Identity(2, 2));
  CHECK(hilbert_metric(ra.d.vec(), closed.vec()) <= 1e-6);
  CHECK(ra.d[0] == doctest::Approx(std::sqrt(2.0)));

  // A default-free start on a diagonal map cycles with period 2; the better
  // cycle point comes back.
  const RaResult oscillating = ra_fixed_point(g, PowerVector::ones(2), 1e-8, 1000);
  CHECK(oscillating.flag == ConvergedFlag::OscillationDetected);
}

TEST_CASE("closed-form diagonal allocation") {
  CHECK((closed_form_diagonal(Eigen::MatrixXd::Identity(2, 2), IntMatrix::Identity(2, 2)).vec() -
         Eigen::Vector2d(1, 1))
            .cwiseAbs()
            .maxCoeff() <= 1e-12);

  const PowerVector two = closed_form_diagonal(Eigen::Vector2d(1.0, 4.0).asDiagonal(), IntMatrix::Identity(2, 2));
  CHECK(two[0] == doctest::Approx(std::sqrt(2.0)));
  CHECK(two[1] == doctest::Approx(1.0 / std::sqrt(2.0)));

  const PowerVector three = closed_form_diagonal(Eigen::Vector3d(1.0, 1.0, 4.0).asDiagonal(), IntMatrix::Identity(3, 3));
  CHECK(three[0] == doctest::Approx(std::pow(2.0, 1.0 / 3.0)));
  CHECK(three[1] == doctest::Approx(std::pow(2.0, 1.0 / 3.0)));
  CHECK(three[2] == doctest::Approx(std::pow(2.0, -2.0 / 3.0)));
  CHECK(std::abs(std::expm1(three.vec().array().log().sum())) <= 1e-9);
}

TEST_CASE("projective diameter and iteration bound") {
  Eigen::MatrixXd positive(2, 2);
  positive << 2.0, 1.0,
              1.0, 2.0;
  CHECK(*projective_diameter(positive) == doctest::Approx(std::log(4.0)));

  Eigen::MatrixXd rank_one(2, 2);
  rank_one << 1.0, 2.0,
              2.0, 4.0;
  CHECK(*projective_diameter(rank_one) == doctest::Approx(0.0));

  Eigen::MatrixXd with_zero(2, 2);
  with_zero << 1.0, 0.0,
               1.0, 1.0;
  CHECK_FALSE(projective_diameter(with_zero).has_value());

  // G whose inverse is [[2, 1], [1, 2]].
  Eigen::MatrixXd g(2, 2);
  g << 2.0 / 3.0, -1.0 / 3.0,
       -1.0 / 3.0, 2.0 / 3.0;
  CHECK(*birkhoff_contraction_ratio(g) == doctest::Approx(std::tanh(std::log(4.0) / 4.0)).epsilon(1e-5));

  CHECK_FALSE(ra_iteration_bound(Eigen::MatrixXd::Identity(2, 2), PowerVector::ones(2), 1e-6).has_value());
  const auto bound = ra_iteration_bound(g, gamma_normalize(Eigen::Vector2d(3.0, 0.5)), 1e-6);
  REQUIRE(bound.has_value());
  CHECK(*bound >= 1);
}

TEST_CASE("per-step contraction stays below the Birkhoff ratio") {
  RngStream rng(83);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 6;
    const Eigen::MatrixXd g = testutil::random_positive_inverse_spd(k, rng);
    const auto kappa = birkhoff_contraction_ratio(g);
    REQUIRE(kappa.has_value());
    Eigen::VectorXd start(k);
    for (int i = 0; i < k; ++i) start[i] = std::exp(rng.uniform(-1.0, 1.0));
    std::vector<RaStep> trace;
    ra_fixed_point(g, gamma_normalize(start), 1e-10, 500, &trace);
    for (size_t t = 1; t < trace.size(); ++t) {
      const double previous = trace[t - 1].hilbert_step;
      const double current = trace[t].hilbert_step;
      // The metric carries ~1e-16 absolute error, so below ~1e-7 the ratio is
      // no longer resolvable to the 1e-9 tolerance; stop checking at 1e-6.
      if (previous < 1e-6 || current < 1e-6) break;
      CHECK(current <= (*kappa + 1e-9) * previous);
    }
  }
}

TEST_CASE("iteration bound is honored") {
  RngStream rng(84);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 6;
    const Eigen::MatrixXd g = testutil::random_positive_inverse_spd(k, rng);
    Eigen::VectorXd start(k);
    for (int i = 0; i < k; ++i) start[i] = std::exp(rng.uniform(-1.0, 1.0));
    const PowerVector init = gamma_normalize(start);
    const double tolerance = 1e-7;
    const auto bound = ra_iteration_bound(g, init, tolerance);
    REQUIRE(bound.has_value());
    const RaResult ra = ra_fixed_point(g, init, tolerance, *bound + 10);
    CHECK(ra.flag == ConvergedFlag::FixedPoint);
    // The bound counts contraction passes after the first measured step.
    CHECK(ra.iterations <= *bound + 1);
  }
}

TEST_CASE("fixed point agrees with the closed form on random diagonal inputs") {
  RngStream rng(85);
  for (int trial = 0; trial < 200; ++trial) {
    const int k = 2 + trial % 7;
    Eigen::VectorXd diag(k);
    for (int i = 0; i < k; ++i) diag[i] = std::exp(rng.uniform(-2.0, 2.0));
    const Eigen::MatrixXd m = diag.asDiagonal();
    const RaResult ra = ra_fixed_point(coupling_matrix(IntMatrix::Identity(k, k), m), 1e-8, 1000);
    const PowerVector closed = closed_form_diagonal(m, IntMatrix::Identity(k, k));
    CHECK(hilbert_metric(ra.d.vec(), closed.vec()) <= 1e-6);
  }
}

TEST_CASE("allocation-to-integer-matrix mapping") {
  CHECK(d_to_A(Eigen::MatrixXd::Identity(3, 3), PowerVector::ones(3)) == IntMatrix::Identity(3, 3));

  const Eigen::MatrixXd stretched = Eigen::Vector2d(1.0, 9.0).asDiagonal();
  const IntMatrix a = d_to_A(stretched, PowerVector::ones(2));
  CHECK(integer_abs_det(a) == 1);
  for (int i = 0; i < 2; ++i) {
    CHECK(a.col(i).cwiseAbs().sum() == 1);
    CHECK(a.row(i).cwiseAbs().sum() == 1);
  }
  CHECK(trace_objective(a, Eigen::VectorXd::Ones(2), stretched) ==
        doctest::Approx(trace_objective(IntMatrix::Identity(2, 2), Eigen::VectorXd::Ones(2), stretched)));

  const double rho = std::pow(10.0, 1.5);
  const Eigen::MatrixXd m = coupling_input_matrix(testutil::sample_channel_a(), PrecoderKind::Rif, rho);
  const IntMatrix sample_a = d_to_A(m, PowerVector::ones(3));
  CHECK(integer_abs_det(sample_a) == 1);
  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(3);
  const double lll_objective = trace_objective(sample_a, ones, m);
  CHECK(lll_objective <= trace_objective(IntMatrix::Identity(3, 3), ones, m) + 1e-12);
  const double bruteforce = bruteforce_integer_objective(m, ones);
  CHECK(lll_objective <= bruteforce * (1.0 + 1e-9));  // LLL finds the enumeration optimum here
  CHECK(lll_objective >= bruteforce * (1.0 - 1e-9));
}

TEST_CASE("alternating optimization") {
  const SolveOutcome at_identity = alternating_optimize(Eigen::MatrixXd::Identity(3, 3), 9.0, PowerVector::ones(3));
  CHECK(at_identity.A == IntMatrix::Identity(3, 3));
  CHECK((at_identity.d.vec() - Eigen::Vector3d(1, 1, 1)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(at_identity.iterations == 1);
  CHECK(at_identity.flag == ConvergedFlag::FixedPoint);

  const Eigen::MatrixXd diag = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  const SolveOutcome on_diagonal = alternating_optimize(diag, 25.0, PowerVector::ones(2));
  const PowerVector closed = closed_form_diagonal(diag, IntMatrix::Identity(2, 2));
  CHECK(hilbert_metric(on_diagonal.d.vec(), closed.vec()) <= 1e-8);
  CHECK(on_diagonal.A * on_diagonal.A.transpose() == IntMatrix::Identity(2, 2));
}

TEST_CASE("alternating optimization stays monotone and self-consistent") {
  RngStream rng(86);
  for (int trial = 0; trial < 60; ++trial) {
    const int k = 4 + trial % 5;
    const Eigen::MatrixXd h = sample_rayleigh(k, k, 2000 + trial);
    const double rho = std::pow(10.0, rng.uniform(0.5, 3.0));
    const Eigen::MatrixXd m = coupling_input_matrix(h, PrecoderKind::Rif, rho);
    const SolveOutcome out = alternating_optimize(m, rho, PowerVector::ones(k));
    for (size_t t = 1; t < out.objective_trace.size(); ++t) {
      CHECK(out.objective_trace[t] <= out.objective_trace[t - 1] * (1.0 + 1e-9));
    }
    if (out.flag == ConvergedFlag::FixedPoint) {
      CHECK(d_to_A(m, out.d) == out.A);
    }
    CHECK(std::abs(out.objective - trace_objective(out.A, out.d.vec(), m)) <= 1e-8 * out.objective);
    CHECK(std::abs(std::expm1(out.d.vec().array().log().sum())) <= 1e-9);
  }
}

TEST_CASE("pattern search on symmetric and diagonal instances") {
  McnSpsOptions options;
  options.seed = 7;
  const double rho = 36.0;
  const SolveOutcome at_identity = mcn_sps(Eigen::MatrixXd::Identity(3, 3), rho, options);
  CHECK(at_identity.A == IntMatrix::Identity(3, 3));
  CHECK((at_identity.d.vec() - Eigen::Vector3d(1, 1, 1)).cwiseAbs().maxCoeff() <= 1e-9);
  CHECK(at_identity.sum_rate == doctest::Approx(1.5 * std::log2(rho / 3.0)));
  CHECK(at_identity.final_radius <= options.radius_tolerance);

  const Eigen::MatrixXd diag = Eigen::Vector2d(1.0, 4.0).asDiagonal();
  const SolveOutcome on_diagonal = mcn_sps(diag, 100.0, options);
  const PowerVector closed = closed_form_diagonal(diag, IntMatrix::Identity(2, 2));
  const double closed_objective = trace_objective(IntMatrix::Identity(2, 2), closed.vec(), diag);
  CHECK(std::abs(on_diagonal.objective - closed_objective) <= 1e-6 * closed_objective);
}

TEST_CASE("pattern search dominates the plain alternating solve") {
  RngStream rng(87);
  for (int trial = 0; trial < 10; ++trial) {
    const int k = 3 + trial % 4;
    const Eigen::MatrixXd h = sample_rayleigh(k, k, 2600 + trial);
    const double rho = std::pow(10.0, rng.uniform(1.0, 2.5));
    const Eigen::MatrixXd m = coupling_input_matrix(h, PrecoderKind::Rif, rho);
    McnSpsOptions options;
    options.seed = 100 + static_cast<std::uint64_t>(trial);
    const SolveOutcome search = mcn_sps(m, rho, options);
    const SolveOutcome plain = alternating_optimize(m, rho, PowerVector::ones(k));
    CHECK(search.sum_rate >= plain.sum_rate - 1e-12);
    CHECK(integer_abs_det(search.A) == 1);
  }
}

TEST_CASE("a custom lattice solver can replace the default one") {
  RngStream rng(89);
  const Eigen::MatrixXd h = sample_rayleigh(4, 4, 3100);
  const Eigen::MatrixXd m = coupling_input_matrix(h, PrecoderKind::Rif, 100.0);
  AoOptions options;
  options.sivp_solver = [](const Eigen::MatrixXd& basis) {
    return IntMatrix::Identity(basis.cols(), basis.cols()).eval();
  };
  const SolveOutcome pinned = alternating_optimize(m, 100.0, PowerVector::ones(4), options);
  CHECK(pinned.A == IntMatrix::Identity(4, 4));
  CHECK(pinned.flag == ConvergedFlag::FixedPoint);
  CHECK(pinned.iterations == 1);

  options.sivp_solver = [](const Eigen::MatrixXd& basis) { return solve_sivp_unimodular(basis, 0.75); };
  const SolveOutcome via_hook = alternating_optimize(m, 100.0, PowerVector::ones(4), options);
  const SolveOutcome via_default = alternating_optimize(m, 100.0, PowerVector::ones(4));
  CHECK(via_hook.A == via_default.A);
  CHECK(via_hook.objective == via_default.objective);
}

TEST_CASE("ray sampling") {
  const PowerVector center = gamma_normalize(Eigen::Vector3d(1.0, 2.0, 0.5));
  const auto degenerate = sample_ray_points(center, 0.0, 4, 1, 1);
  CHECK(degenerate.size() == 4);
  for (const auto& p : degenerate) CHECK((p - center.vec()).cwiseAbs().maxCoeff() == 0.0);

  const auto points = sample_ray_points(center, 5.0, 16, 42, 3);
  CHECK(points.size() == 16);
  for (const auto& p : points) {
    CHECK((p.array() > 0.0).all());
  }
  const auto repeat = sample_ray_points(center, 5.0, 16, 42, 3);
  for (size_t i = 0; i < points.size(); ++i) CHECK(points[i] == repeat[i]);
  const auto other_round = sample_ray_points(center, 5.0, 16, 42, 4);
  CHECK(points[0] != other_round[0]);
}

TEST_CASE("power vectors keep the unit-product constraint everywhere") {
  RngStream rng(88);
  for (int trial = 0; trial < 50; ++trial) {
    const int k = 2 + trial % 6;
    const Eigen::MatrixXd m = testutil::random_spd(k, rng);
    const double rho = std::pow(10.0, rng.uniform(0.5, 2.5));
    const SolveOutcome out = alternating_optimize(m, rho, PowerVector::ones(k));
    CHECK(std::abs(std::expm1(out.d.vec().array().log().sum())) <= 1e-9);
  }
}

TEST_SUITE_END();
