#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "brmax/gauss.hpp"
#include "testutil.hpp"

using brmax::AnchorSpec;
using brmax::GaussianModel;
using brmax::Grid;
using brmax::NumericError;
using brmax::ProposalMixture;
using brmax::Rng;
using brmax::Variogram;

namespace {

Grid line_grid(std::initializer_list<double> pts) {
  Grid g;
  g.points.resize(static_cast<int>(pts.size()), 1);
  int i = 0;
  for (double v : pts) g.points(i++, 0) = v;
  return g;
}

GaussianModel degenerate_point() {
  return brmax::build_model(line_grid({0.0}), Variogram(1.0, 1.0),
                            AnchorSpec::at_point(Eigen::VectorXd::Zero(1)));
}

// C = [[0, 0], [0, 2]] with the first coordinate pinned to zero.
GaussianModel two_point() {
  return brmax::build_model(line_grid({0.0, 1.0}), Variogram(1.0, 1.0),
                            AnchorSpec::at_point(Eigen::VectorXd::Zero(1)));
}

GaussianModel nonsingular_pair() {
  return brmax::build_model(line_grid({1.0, 2.0}), Variogram(1.0, 1.5),
                            AnchorSpec::at_point(Eigen::VectorXd::Zero(1)));
}

}  // namespace

TEST_CASE("a fully degenerate one-point model is surely zero and consumes no randomness") {
  const auto m = degenerate_point();
  CHECK(m.rank == 0);
  Rng rng(5);
  for (int k = 0; k < 20; ++k) {
    CHECK(brmax::sample_spectral(m, rng).w[0] == 0.0);
    CHECK(brmax::sample_shifted(m, 0, rng).w[0] == 0.0);
    CHECK(brmax::sample_inflated(m, 0, 0.7, rng).w[0] == 0.0);
  }
  Rng fresh(5);
  CHECK(rng.uniform() == fresh.uniform());
}

TEST_CASE("two-point moments match the closed form") {
  const auto m = two_point();
  const long n = 100000;

  SUBCASE("base draws center on -sigma/2") {
    Rng rng(11);
    std::vector<double> w1(n);
    for (long k = 0; k < n; ++k) {
      const auto s = brmax::sample_spectral(m, rng);
      CHECK(s.w[0] == 0.0);
      w1[k] = s.w[1];
    }
    const auto ms = testutil::mean_se(w1);
    CHECK(std::abs(ms.mean - (-1.0)) <= 0.02);
  }

  SUBCASE("shifting by column 1 moves the mean to +1") {
    Rng rng(12);
    std::vector<double> w1(n);
    for (long k = 0; k < n; ++k) w1[k] = brmax::sample_shifted(m, 1, rng).w[1];
    const auto ms = testutil::mean_se(w1);
    CHECK(std::abs(ms.mean - 1.0) <= 0.02);
  }

  SUBCASE("inflation scales the variance by 1/(1-eps)") {
    Rng rng(13);
    std::vector<double> w1(n);
    for (long k = 0; k < n; ++k) {
      const auto s = brmax::sample_inflated(m, 1, 0.5, rng);
      CHECK(s.w[0] == 0.0);  // pinned coordinate stays pinned for all eps
      w1[k] = s.w[1];
    }
    double mean = 0.0;
    for (double v : w1) mean += v;
    mean /= n;
    double var = 0.0;
    for (double v : w1) var += (v - mean) * (v - mean);
    var /= (n - 1);
    CHECK(std::abs(var - 4.0) <= 0.1);
  }
}

TEST_CASE("spectral draws are normalized: E exp(w_i) = 1 at every site") {
  const Grid g = Grid::lattice({Grid::AxisRange{0.0, 1.0, 5.0}, Grid::AxisRange{0.0, 1.0, 5.0}});
  const auto m = brmax::build_model(g, Variogram(5.0, 1.5), AnchorSpec::corner_average());
  const long n = 40000;
  Rng rng(21);
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(m.n());
  Eigen::ArrayXd sumsq = Eigen::ArrayXd::Zero(m.n());
  for (long k = 0; k < n; ++k) {
    const Eigen::ArrayXd e = brmax::sample_spectral(m, rng).w.array().exp();
    sum += e;
    sumsq += e.square();
  }
  for (int i = 0; i < m.n(); ++i) {
    const double mean = sum[i] / n;
    const double var = (sumsq[i] / n - mean * mean) * n / (n - 1.0);
    const double se = std::sqrt(var / n);
    CHECK(std::abs(mean - 1.0) <= 3.5 * se);
  }
}

TEST_CASE("tilted expectations agree between the shifted sampler and direct reweighting") {
  const auto m = nonsingular_pair();
  const long n = 100000;

  // E exp(w_1 - w_0) under component 0 ...
  Rng rng_a(31);
  std::vector<double> a(n);
  for (long k = 0; k < n; ++k) {
    const auto s = brmax::sample_shifted(m, 0, rng_a);
    a[k] = std::exp(s.w[1] - s.w[0]);
  }
  // ... equals E exp(W_1 + C_10 - W_0 - C_00) under the base law.
  Rng rng_b(32);
  std::vector<double> b(n);
  for (long k = 0; k < n; ++k) {
    const auto s = brmax::sample_spectral(m, rng_b);
    b[k] = std::exp(s.w[1] + m.C(1, 0) - s.w[0] - m.C(0, 0));
  }
  const auto ma = testutil::mean_se(a);
  const auto mb = testutil::mean_se(b);
  CHECK(std::isfinite(ma.mean));
  CHECK(std::abs(ma.mean - mb.mean) <= 3.0 * std::hypot(ma.se, mb.se));
}

TEST_CASE("epsilon zero inflation reproduces the shift bit for bit") {
  for (const auto& m : {two_point(), nonsingular_pair()}) {
    Rng r1(77), r2(77);
    for (int k = 0; k < 50; ++k) {
      const auto a = brmax::sample_shifted(m, k % m.n(), r1);
      const auto b = brmax::sample_inflated(m, k % m.n(), 0.0, r2);
      REQUIRE(a.w.size() == b.w.size());
      for (int i = 0; i < a.w.size(); ++i) CHECK(a.w[i] == b.w[i]);
    }
    CHECK(r1.uniform() == r2.uniform());
  }
}

TEST_CASE("density ratio terms") {
  const auto m = nonsingular_pair();

  SUBCASE("zero state with uniform weights") {
    const ProposalMixture mix = ProposalMixture::uniform(m);
    const auto t = brmax::log_density_ratio_terms(mix, Eigen::VectorXd::Zero(2));
    CHECK(t.sup == 0.0);
    CHECK(std::abs(t.mix_logsumexp) <= 1e-15);
    const Eigen::VectorXd half_sigma = 0.5 * m.sigma;
    const double expected = half_sigma.dot(m.C.ldlt().solve(half_sigma));
    CHECK(t.quad_form == doctest::Approx(expected).epsilon(1e-12));
  }

  SUBCASE("hand example (0, log 2)") {
    const ProposalMixture mix = ProposalMixture::uniform(m);
    Eigen::Vector2d w(0.0, std::log(2.0));
    const auto t = brmax::log_density_ratio_terms(mix, w, false);
    CHECK(t.sup == doctest::Approx(std::log(2.0)).epsilon(1e-15));
    CHECK(t.mix_logsumexp == doctest::Approx(std::log(1.5)).epsilon(1e-14));
    CHECK(t.quad_form == 0.0);
  }

  SUBCASE("logsumexp agrees with naive summation") {
    const Grid g = Grid::lattice({Grid::AxisRange{1.0, 1.0, 5.0}});
    const auto m5 =
        brmax::build_model(g, Variogram(2.0, 1.2), AnchorSpec::at_point(Eigen::VectorXd::Zero(1)));
    Rng rng(9);
    Eigen::VectorXd p(5);
    p << 0.1, 0.25, 0.3, 0.15, 0.2;
    const ProposalMixture mix(m5, p, 0.3);
    for (int rep = 0; rep < 20; ++rep) {
      Eigen::VectorXd w(5);
      for (int i = 0; i < 5; ++i) w[i] = 3.0 * (rng.uniform() - 0.5);
      const auto t = brmax::log_density_ratio_terms(mix, w, false);
      double naive = 0.0;
      for (int i = 0; i < 5; ++i) naive += p[i] * std::exp(0.7 * w[i]);
      CHECK(t.mix_logsumexp == doctest::Approx(std::log(naive)).epsilon(1e-12));
    }
  }

  SUBCASE("zero-weight components cannot overflow the mixture term") {
    Eigen::Vector2d p(0.0, 1.0);
    const ProposalMixture mix(m, p, 0.0);
    Eigen::Vector2d w(500.0, 0.0);
    const auto t = brmax::log_density_ratio_terms(mix, w, false);
    CHECK(t.mix_logsumexp == doctest::Approx(0.0).epsilon(1e-15));
  }
}

TEST_CASE("mixture sampling follows the component weights") {
  const auto m = nonsingular_pair();
  Eigen::Vector2d p(0.3, 0.7);
  const ProposalMixture mix(m, p, 0.0);

  SUBCASE("component picking is an inverse-cdf walk") {
    Eigen::Vector3d q(0.0, 1.0, 0.0);
    Rng rng(3);
    for (int k = 0; k < 100; ++k) CHECK(brmax::pick_component(q, rng) == 1);
  }

  SUBCASE("moments match the mixture law") {
    const long n = 100000;
    Rng rng(41);
    Eigen::Vector2d sum = Eigen::Vector2d::Zero();
    long ones = 0;
    for (long k = 0; k < n; ++k) {
      const auto s = brmax::sample_mixture(mix, rng);
      REQUIRE(s.source_index >= 0);
      REQUIRE(s.source_index < 2);
      ones += s.source_index;
      sum += s.w;
    }
    const Eigen::Vector2d mean = sum / static_cast<double>(n);
    const Eigen::Vector2d expected = 0.3 * m.C.col(0) + 0.7 * m.C.col(1) - 0.5 * m.sigma;
    CHECK(std::abs(static_cast<double>(ones) / n - 0.7) <= 0.01);
    CHECK((mean - expected).cwiseAbs().maxCoeff() <= 0.04);
  }
}

TEST_CASE("mixture validation rejects malformed inputs") {
  const auto m = nonsingular_pair();
  Eigen::Vector2d bad_neg(-0.1, 1.1);
  Eigen::Vector2d bad_sum(0.4, 0.4);
  Eigen::Vector3d bad_len(0.2, 0.4, 0.4);
  Eigen::Vector2d ok(0.5, 0.5);
  CHECK_THROWS_AS(ProposalMixture(m, bad_neg, 0.0), NumericError);
  CHECK_THROWS_AS(ProposalMixture(m, bad_sum, 0.0), NumericError);
  CHECK_THROWS_AS(ProposalMixture(m, bad_len, 0.0), NumericError);
  CHECK_THROWS_AS(ProposalMixture(m, ok, 1.0), NumericError);
  CHECK_THROWS_AS(ProposalMixture(m, ok, -0.2), NumericError);
  Rng rng(1);
  CHECK_THROWS_AS(brmax::sample_inflated(m, 5, 0.0, rng), NumericError);
  CHECK_THROWS_AS(brmax::sample_inflated(m, 0, 1.0, rng), NumericError);

  const ProposalMixture uni = ProposalMixture::uniform(m, 0.25);
  CHECK(uni.weights[0] == doctest::Approx(0.5));
  CHECK(uni.epsilon == 0.25);
}
