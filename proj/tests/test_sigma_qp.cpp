#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "brmax/gauss.hpp"
#include "brmax/model.hpp"
#include "brmax/weights_qp.hpp"
#include "testutil.hpp"

using brmax::AnchorSpec;
using brmax::GaussianModel;
using brmax::Grid;
using brmax::NumericError;
using brmax::Rng;
using brmax::SigmaMatrix;
using brmax::Variogram;
using testutil::mean_se;
using testutil::normal_cdf;

namespace {

Eigen::MatrixXd line_points(std::initializer_list<double> xs) {
  Eigen::MatrixXd pts(static_cast<long>(xs.size()), 1);
  int r = 0;
  for (double x : xs) pts(r++, 0) = x;
  return pts;
}

GaussianModel one_point_model() {
  Grid g;
  g.points = line_points({0.0});
  return brmax::build_model(g, Variogram(1.0, 1.0), AnchorSpec::at_point(Eigen::VectorXd::Zero(1)));
}

// C = [[0, 0], [0, 2]]: W_0 = 0 a.s., W_1 ~ N(-1, 2).
GaussianModel two_point_model() {
  Grid g;
  g.points = line_points({0.0, 1.0});
  return brmax::build_model(g, Variogram(1.0, 1.0), AnchorSpec::at_point(Eigen::VectorXd::Zero(1)));
}

// Anchor midway between the two sites, so the components are exchangeable.
GaussianModel exchangeable_model() {
  Grid g;
  g.points = line_points({-1.0, 1.0});
  return brmax::build_model(g, Variogram(1.0, 1.5), AnchorSpec::at_point(Eigen::VectorXd::Zero(1)));
}

Eigen::MatrixXd random_spd(int n, Rng& rng) {
  Eigen::MatrixXd A(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) A(i, j) = 2.0 * rng.uniform() - 1.0;
  return A.transpose() * A / n + 0.05 * Eigen::MatrixXd::Identity(n, n);
}

Eigen::VectorXd random_simplex_point(int n, Rng& rng) {
  Eigen::VectorXd q(n);
  for (int i = 0; i < n; ++i) q[i] = -std::log(rng.uniform());
  return q / q.sum();
}

}  // namespace

TEST_CASE("a surely-zero field has unit sigma with zero error") {
  const GaussianModel m = one_point_model();
  const SigmaMatrix s = brmax::estimate_sigma(m, 100, 7);
  CHECK(s.entries(0, 0) == 1.0);
  CHECK(s.se(0, 0) == 0.0);
  CHECK(s.n_mc == 100);

  const brmax::QpResult qp = brmax::solve_weights_qp(s);
  CHECK(qp.p.size() == 1);
  CHECK(qp.p[0] == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(qp.used_closed_form);

  CHECK_THROWS_AS(brmax::estimate_sigma(m, 1, 7), NumericError);
}

TEST_CASE("two-point sigma matches its closed form") {
  const GaussianModel m = two_point_model();
  const long n_mc = 200000;
  const SigmaMatrix s = brmax::estimate_sigma(m, n_mc, 20260819);

  const double phi_m = normal_cdf(-1.0 / std::sqrt(2.0));
  const double off_exact = 2.0 * phi_m;
  const double diag_exact =
      normal_cdf(1.0 / std::sqrt(2.0)) + std::exp(2.0) * normal_cdf(-3.0 / std::sqrt(2.0));

  SUBCASE("entries sit within the Monte Carlo band") {
    CHECK(std::abs(s.entries(0, 1) - off_exact) <= 3.5 * s.se(0, 1));
    CHECK(std::abs(s.entries(0, 0) - diag_exact) <= 3.5 * s.se(0, 0));
    CHECK(std::abs(s.entries(1, 1) - diag_exact) <= 3.5 * s.se(1, 1));
  }

  SUBCASE("the matrix is exactly symmetric with entries in (0, 1]") {
    CHECK(s.entries(0, 1) == s.entries(1, 0));
    CHECK(s.se(0, 1) == s.se(1, 0));
    CHECK(s.entries.minCoeff() > 0.0);
    CHECK(s.entries.maxCoeff() <= 1.0 + 1e-12);
  }

  SUBCASE("an independent tilt-free estimator agrees") {
    // Sigma_ik = E exp(W_i + W_k - max_j W_j) under the base law.
    Rng rng(99, 1234);
    const long n2 = 200000;
    std::vector<double> v01, v00;
    v01.reserve(n2);
    v00.reserve(n2);
    for (long r = 0; r < n2; ++r) {
      const Eigen::VectorXd w = brmax::sample_spectral(m, rng).w;
      const double mx = w.maxCoeff();
      v01.push_back(std::exp(w[0] + w[1] - mx));
      v00.push_back(std::exp(2.0 * w[0] - mx));
    }
    const auto m01 = mean_se(v01);
    const auto m00 = mean_se(v00);
    CHECK(std::abs(s.entries(0, 1) - m01.mean) <=
          3.5 * std::sqrt(s.se(0, 1) * s.se(0, 1) + m01.se * m01.se));
    CHECK(std::abs(s.entries(0, 0) - m00.mean) <=
          3.5 * std::sqrt(s.se(0, 0) * s.se(0, 0) + m00.se * m00.se));
  }
}

TEST_CASE("sigma estimation is deterministic across thread counts") {
  Grid g;
  g.points = line_points({0.0, 0.3, 1.0, 1.7, 2.0});
  const GaussianModel m = brmax::build_model(
      g, Variogram(1.0, 1.2), AnchorSpec::at_point(Eigen::VectorXd::Constant(1, -0.4)));
  const SigmaMatrix a = brmax::estimate_sigma(m, 5000, 42, 1);
  const SigmaMatrix b = brmax::estimate_sigma(m, 5000, 42, 4);
  CHECK((a.entries.array() == b.entries.array()).all());
  CHECK((a.se.array() == b.se.array()).all());

  const SigmaMatrix c = brmax::estimate_sigma(m, 5000, 43, 1);
  CHECK(!(a.entries.array() == c.entries.array()).all());
}

TEST_CASE("exchangeable sites get equal weights") {
  const GaussianModel m = exchangeable_model();
  const SigmaMatrix s = brmax::estimate_sigma(m, 50000, 5);
  CHECK(std::abs(s.entries(0, 0) - s.entries(1, 1)) <=
        3.5 * std::sqrt(s.se(0, 0) * s.se(0, 0) + s.se(1, 1) * s.se(1, 1)));

  // Exact exchangeable matrix: the minimizer is uniform.
  Eigen::MatrixXd S(2, 2);
  S << 0.9, 0.4, 0.4, 0.9;
  const brmax::QpResult qp = brmax::solve_weights_qp(S);
  CHECK(qp.used_closed_form);
  CHECK(qp.p[0] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(qp.p[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(qp.objective == doctest::Approx(0.65).epsilon(1e-12));
  CHECK(qp.kkt_residual <= 1e-10);
}

TEST_CASE("random quadratic programs satisfy optimality conditions") {
  Rng rng(7, 1);
  for (int trial = 0; trial < 20; ++trial) {
    CAPTURE(trial);
    const Eigen::MatrixXd S = random_spd(5, rng);
    const brmax::QpResult qp = brmax::solve_weights_qp(S);

    CHECK(std::abs(qp.p.sum() - 1.0) <= 1e-12);
    CHECK(qp.p.minCoeff() >= -1e-14);
    CHECK(qp.kkt_residual <= 1e-8);
    CHECK(qp.objective == doctest::Approx(qp.p.dot(S * qp.p)).epsilon(1e-12));

    for (int k = 0; k < 100; ++k) {
      const Eigen::VectorXd q = random_simplex_point(5, rng);
      CHECK(qp.objective <= q.dot(S * q) + 1e-12);
    }

    const brmax::QpResult scaled = brmax::solve_weights_qp(7.3 * S);
    CHECK((scaled.p - qp.p).cwiseAbs().maxCoeff() <= 1e-10);
    CHECK(scaled.objective == doctest::Approx(7.3 * qp.objective).epsilon(1e-10));

    if (trial < 6) {
      const testutil::SimplexBrute brute = testutil::simplex_min_quad(S);
      CHECK(qp.objective <= brute.value + 1e-12);
      CHECK(brute.value - qp.objective <= 1e-5);
    }
  }
}

TEST_CASE("the floor constraint pins weights without breaking optimality") {
  Eigen::MatrixXd S = Eigen::Vector2d(1.0, 10.0).asDiagonal();

  SUBCASE("an interior optimum violating the floor lands on it") {
    const brmax::QpResult qp = brmax::solve_weights_qp(S, 0.3);
    CHECK(!qp.used_closed_form);
    CHECK(qp.p[0] == doctest::Approx(0.7).epsilon(1e-9));
    CHECK(qp.p[1] == doctest::Approx(0.3).epsilon(1e-9));
    CHECK(qp.kkt_residual <= 1e-8);
  }

  SUBCASE("a floor below the interior optimum is inactive") {
    const brmax::QpResult qp = brmax::solve_weights_qp(S, 0.05);
    CHECK(qp.used_closed_form);
    CHECK(qp.p[0] == doctest::Approx(10.0 / 11.0).epsilon(1e-12));
    CHECK(qp.p[1] == doctest::Approx(1.0 / 11.0).epsilon(1e-12));
  }

  SUBCASE("infeasible floors are rejected") {
    CHECK_THROWS_AS(brmax::solve_weights_qp(S, 0.5), NumericError);
    CHECK_THROWS_AS(brmax::solve_weights_qp(S, 0.6), NumericError);
    CHECK_THROWS_AS(brmax::solve_weights_qp(S, -0.1), NumericError);
  }
}

TEST_CASE("a strongly coupled pair drives one weight to zero") {
  Eigen::MatrixXd S(2, 2);
  S << 1.0, 0.9, 0.9, 0.82;
  const brmax::QpResult qp = brmax::solve_weights_qp(S);
  CHECK(!qp.used_closed_form);
  CHECK(std::abs(qp.p[0]) <= 1e-9);
  CHECK(qp.p[1] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(qp.objective == doctest::Approx(0.82).epsilon(1e-9));
  CHECK(qp.kkt_residual <= 1e-8);
}

TEST_CASE("rank-deficient matrices are regularized and still solved") {
  Rng rng(11, 3);
  Eigen::MatrixXd B(5, 3);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 3; ++j) B(i, j) = rng.normal();
  const Eigen::MatrixXd S = B * B.transpose();

  const brmax::QpResult qp = brmax::solve_weights_qp(S);
  CHECK(qp.regularized);
  CHECK(std::abs(qp.p.sum() - 1.0) <= 1e-9);
  CHECK(qp.p.minCoeff() >= -1e-12);
  CHECK(qp.kkt_residual <= 1e-8);
}

TEST_CASE("malformed inputs are rejected") {
  CHECK_THROWS_AS(brmax::solve_weights_qp(Eigen::MatrixXd::Zero(2, 3)), NumericError);
  CHECK_THROWS_AS(brmax::solve_weights_qp(Eigen::MatrixXd::Zero(2, 2)), NumericError);
}

TEST_CASE("a corner-averaged lattice keeps sigma inside the unit box") {
  Grid g = Grid::lattice({{0.0, 1.0, 5.0}, {0.0, 1.0, 5.0}});
  const GaussianModel m = brmax::build_model(g, Variogram(2.5, 1.5), AnchorSpec::corner_average());
  const SigmaMatrix s = brmax::estimate_sigma(m, 2000, 9);
  CHECK(s.entries.minCoeff() > 0.0);
  CHECK(s.entries.maxCoeff() <= 1.0 + 1e-12);
  CHECK((s.entries - s.entries.transpose()).cwiseAbs().maxCoeff() == 0.0);
}
