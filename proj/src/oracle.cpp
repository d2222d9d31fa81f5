#include "brmax/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace brmax {

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

int argmax_lowest(const Eigen::VectorXd& w) {
  int idx = 0;
  w.maxCoeff(&idx);
  return idx;
}

}  // namespace

OracleTables ho_dombry_tables(const GaussianModel& model, long n_cdf_mc, Rng& rng) {
  const int N = model.n();
  if (N > 6) throw NumericError("oracle tables are limited to N <= 6");
  if (model.degenerate_index || model.rank < N)
    throw ModelError(
        "oracle requires a nonsingular covariance; grid-point and corner-average anchors "
        "make it singular, use an anchor point off the grid");
  if (n_cdf_mc < 2 && N > 2) throw NumericError("n_cdf_mc must be >= 2");

  OracleTables tab;
  tab.n_cdf_mc = n_cdf_mc;

  // K = C^{-1} via a dedicated unpivoted factorization (the stored factor is
  // pivoted and rank-revealing, which the oracle's exact algebra cannot use).
  const CholeskyResult cr = cholesky_lower(model.C, 1e-12);
  if (!cr.ok)
    throw ModelError("oracle requires a nonsingular covariance; use an anchor point off the grid");
  Eigen::MatrixXd K = Eigen::MatrixXd::Identity(N, N);
  cr.L.triangularView<Eigen::Lower>().solveInPlace(K);
  cr.L.transpose().triangularView<Eigen::Upper>().solveInPlace(K);
  K = 0.5 * (K + K.transpose());

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(N);
  const Eigen::VectorXd K1 = K * ones;
  const double s11 = ones.dot(K1);
  tab.Q = K - (K1 * K1.transpose()) / s11;
  const double beta = (1.0 - 0.5 * model.sigma.dot(K1)) / s11;
  tab.m = -(K * (0.5 * model.sigma + beta * ones));

  if (N == 1) {
    tab.argmax_probs = Eigen::VectorXd::Ones(1);
    tab.argmax_se = Eigen::VectorXd::Zero(1);
    tab.cond_mean.resize(1);
    tab.cond_chol.resize(1);
    return tab;
  }

  Eigen::VectorXd log_det_term(N);   // log of det^{-1/2} exp(m'Q^{-1}m / 2)
  Eigen::VectorXd phi(N), phi_se(N);
  tab.cond_mean.resize(N);
  tab.cond_chol.resize(N);

  for (int i = 0; i < N; ++i) {
    Eigen::MatrixXd Qi(N - 1, N - 1);
    Eigen::VectorXd mi(N - 1);
    for (int r = 0, rr = 0; r < N; ++r) {
      if (r == i) continue;
      mi[rr] = tab.m[r];
      for (int c = 0, cc = 0; c < N; ++c) {
        if (c == i) continue;
        Qi(rr, cc) = tab.Q(r, c);
        ++cc;
      }
      ++rr;
    }

    const CholeskyResult qc = cholesky_lower(Qi, 1e-12);
    if (!qc.ok) throw NumericError("oracle: reduced precision matrix is not positive definite");
    double logdet = 0.0;
    for (int k = 0; k < N - 1; ++k) logdet += 2.0 * std::log(qc.L(k, k));

    // mu = Q_{-i}^{-1} m_{-i}, cov = Q_{-i}^{-1}
    Eigen::VectorXd mu = mi;
    qc.L.triangularView<Eigen::Lower>().solveInPlace(mu);
    const double quad = mu.squaredNorm();  // m' Q^{-1} m
    qc.L.transpose().triangularView<Eigen::Upper>().solveInPlace(mu);

    Eigen::MatrixXd cov = Eigen::MatrixXd::Identity(N - 1, N - 1);
    qc.L.triangularView<Eigen::Lower>().solveInPlace(cov);
    cov = cov.transpose() * cov;  // L^{-T} L^{-1}
    const CholeskyResult cc = cholesky_lower(cov, 1e-12);
    if (!cc.ok) throw NumericError("oracle: conditional covariance is not positive definite");

    tab.cond_mean[i] = mu;
    tab.cond_chol[i] = cc.L;
    log_det_term[i] = -0.5 * logdet + 0.5 * quad;

    if (N == 2) {
      const double sd = cc.L(0, 0);
      phi[i] = normal_cdf(-mu[0] / sd);
      phi_se[i] = 0.0;
    } else {
      long hits = 0;
      Eigen::VectorXd z(N - 1);
      for (long r = 0; r < n_cdf_mc; ++r) {
        for (int k = 0; k < N - 1; ++k) z[k] = rng.normal();
        const Eigen::VectorXd x = mu + cc.L.triangularView<Eigen::Lower>() * z;
        if ((x.array() <= 0.0).all()) ++hits;
      }
      const double p = static_cast<double>(hits) / static_cast<double>(n_cdf_mc);
      phi[i] = p;
      phi_se[i] = std::sqrt(std::max(p * (1.0 - p), 0.0) / static_cast<double>(n_cdf_mc));
      if (p == 0.0)
        throw NumericError("oracle: orthant probability estimated as 0; increase n_cdf_mc");
    }
  }

  // Normalize in log space; propagate the CDF errors through the ratio.
  const double shift = log_det_term.maxCoeff();
  Eigen::VectorXd u(N), var_u(N);
  for (int i = 0; i < N; ++i) {
    const double d = std::exp(log_det_term[i] - shift);
    u[i] = d * phi[i];
    var_u[i] = d * d * phi_se[i] * phi_se[i];
  }
  const double su = u.sum();
  tab.argmax_probs = u / su;
  tab.argmax_se.resize(N);
  for (int i = 0; i < N; ++i) {
    double v = 0.0;
    for (int k = 0; k < N; ++k) {
      const double dpdk = (k == i ? su - u[i] : -u[i]) / (su * su);
      v += dpdk * dpdk * var_u[k];
    }
    tab.argmax_se[i] = std::sqrt(v);
  }
  return tab;
}

SpectralSample ho_dombry_sample(const OracleTables& tables, const GaussianModel& model,
                                Rng& rng) {
  const int N = model.n();
  if (static_cast<int>(tables.argmax_probs.size()) != N)
    throw NumericError("oracle tables do not match the model");

  SpectralSample s;
  const int i = pick_component(tables.argmax_probs, rng);
  s.source_index = i;
  s.w = Eigen::VectorXd::Zero(N);
  if (N == 1) return s;

  const Eigen::VectorXd& mu = tables.cond_mean[i];
  const Eigen::MatrixXd& L = tables.cond_chol[i];
  Eigen::VectorXd z(N - 1), x(N - 1);
  constexpr long kMaxTries = 10000000L;
  for (long t = 0; t < kMaxTries; ++t) {
    for (int k = 0; k < N - 1; ++k) z[k] = rng.normal();
    x = mu + L.triangularView<Eigen::Lower>() * z;
    if ((x.array() <= 0.0).all()) {
      for (int j = 0, k = 0; j < N; ++j)
        if (j != i) s.w[j] = x[k++];
      return s;
    }
  }
  throw NumericError("oracle sampler stalled: truncated-Gaussian rejection exceeded 1e7 tries; "
                     "use a smaller N or the main samplers");
}

ResampleResult resampling_oracle(const GaussianModel& model, long n_pool, long n_out, Rng& rng) {
  if (n_out < 1) throw NumericError("n_out must be >= 1");
  if (n_pool < n_out) throw NumericError("n_pool must be >= n_out (and should be much larger)");
  const int N = model.n();

  Eigen::MatrixXd pool(n_pool, N);
  std::vector<double> cum(n_pool);
  double total = 0.0;
  for (long r = 0; r < n_pool; ++r) {
    const Eigen::VectorXd w = sample_spectral(model, rng).w;
    pool.row(r) = w.transpose();
    total += std::exp(w.maxCoeff());
    cum[r] = total;
  }

  ResampleResult out;
  out.mean_weight = total / static_cast<double>(n_pool);
  SampleBatch& b = out.batch;
  b.variant = "resample";
  b.states.resize(n_out, N);
  b.sup_stat.resize(n_out);
  b.argmax_index.resize(n_out);
  b.proposal_counts.assign(n_out, 1);
  b.total_proposals = n_out;
  b.mean_proposals = 1.0;
  for (long s = 0; s < n_out; ++s) {
    const double u = rng.uniform() * total;
    const long r = std::lower_bound(cum.begin(), cum.end(), u) - cum.begin();
    const long rr = std::min(r, n_pool - 1);
    b.states.row(s) = pool.row(rr);
    b.sup_stat[s] = pool.row(rr).maxCoeff();
    b.argmax_index[s] = argmax_lowest(pool.row(rr).transpose());
  }
  return out;
}

}  // namespace brmax
