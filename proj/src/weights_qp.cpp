#include "brmax/weights_qp.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "brmax/gauss.hpp"

namespace brmax {

SigmaMatrix estimate_sigma(const GaussianModel& m, long n_mc, std::uint64_t seed, int n_threads) {
  if (n_mc < 2) throw NumericError("estimate_sigma needs n_mc >= 2");
  const int N = m.n();

  struct Partial {
    Eigen::ArrayXXd sum, sumsq;
  };

  Eigen::ArrayXXd sum = Eigen::ArrayXXd::Zero(N, N);
  Eigen::ArrayXXd sumsq = Eigen::ArrayXXd::Zero(N, N);

  auto work = [&](int b) -> Partial {
    Partial part{Eigen::ArrayXXd::Zero(N, N), Eigen::ArrayXXd::Zero(N, N)};
    const auto [lo, hi] = block_range(n_mc, kMcBlocks, b);
    if (lo == hi) return part;
    Rng rng(seed, streams::block(streams::kSigma, static_cast<std::uint64_t>(b)));
    Eigen::MatrixXd B(N, N);
    for (long r = lo; r < hi; ++r) {
      const Eigen::VectorXd w = sample_spectral(m, rng).w;
      // Row i of B is the field shifted toward component i: B_ik = w_k + C_ik.
      B = m.C;
      B.rowwise() += w.transpose();
      const Eigen::VectorXd mx = B.rowwise().maxCoeff();
      const Eigen::ArrayXXd A = (B.colwise() - mx).array().exp();
      part.sum += A;
      part.sumsq += A.square();
    }
    return part;
  };

  run_ordered_blocks(kMcBlocks, n_threads, work, [&](int, Partial part) {
    sum += part.sum;
    sumsq += part.sumsq;
  });

  const double n = static_cast<double>(n_mc);
  Eigen::ArrayXXd mean = sum / n;
  Eigen::ArrayXXd var = (sumsq / n - mean.square()) * (n / (n - 1.0));
  Eigen::ArrayXXd se = (var.max(0.0) / n).sqrt();

  SigmaMatrix out;
  out.entries = 0.5 * (mean.matrix() + mean.matrix().transpose());
  const Eigen::ArrayXXd se2 = se.square();
  out.se = (0.5 * (se2 + se2.transpose()).sqrt()).matrix();
  out.n_mc = n_mc;
  return out;
}

namespace {

// KKT residual for min p^T S p, sum p = 1, p >= floor. Indices at the floor
// are treated as the active set.
double kkt_residual(const Eigen::MatrixXd& S, const Eigen::VectorXd& p, double floor) {
  const int N = static_cast<int>(p.size());
  const Eigen::VectorXd g = 2.0 * (S * p);
  double lam_sum = 0.0;
  int n_free = 0;
  for (int i = 0; i < N; ++i)
    if (p[i] > floor + 1e-12) {
      lam_sum += g[i];
      ++n_free;
    }
  const double lam = n_free > 0 ? -lam_sum / n_free : -g.mean();

  double res = std::abs(p.sum() - 1.0);
  res = std::max(res, floor - p.minCoeff());
  for (int i = 0; i < N; ++i) {
    const double mu = g[i] + lam;
    if (p[i] > floor + 1e-12) {
      res = std::max(res, std::abs(mu));  // stationarity on the free block
    } else {
      res = std::max(res, std::max(0.0, -mu));      // dual feasibility
      res = std::max(res, std::abs(mu * (p[i] - floor)));  // complementarity
    }
  }
  return res;
}

Eigen::VectorXd refined_solve(const Eigen::LDLT<Eigen::MatrixXd>& ldlt, const Eigen::MatrixXd& S,
                              const Eigen::VectorXd& rhs) {
  Eigen::VectorXd x = ldlt.solve(rhs);
  x += ldlt.solve(rhs - S * x);
  return x;
}

}  // namespace

QpResult solve_weights_qp(const Eigen::MatrixXd& sigma, double floor) {
  const int N = static_cast<int>(sigma.rows());
  if (N < 1 || sigma.cols() != N) throw NumericError("sigma matrix must be square");
  if (floor < 0.0) throw NumericError("weight floor must be >= 0");
  if (floor * N >= 1.0) throw NumericError("weight floor infeasible: N * floor must be < 1");

  Eigen::MatrixXd S = 0.5 * (sigma + sigma.transpose());
  const double scale = S.trace() / N;
  if (!(scale > 0.0)) throw NumericError("sigma matrix has nonpositive trace");

  QpResult res;
  {
    Eigen::LDLT<Eigen::MatrixXd> probe(S);
    if (probe.info() != Eigen::Success || probe.vectorD().minCoeff() <= 1e-12 * scale) {
      S.diagonal().array() += 1e-10 * scale;
      res.regularized = true;
    }
  }

  Eigen::LDLT<Eigen::MatrixXd> ldlt(S);
  if (ldlt.info() != Eigen::Success) throw NumericError("sigma factorization failed");

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(N);
  {
    const Eigen::VectorXd y = refined_solve(ldlt, S, ones);
    const double denom = y.sum();
    if (denom != 0.0) {
      const Eigen::VectorXd p = y / denom;
      if (p.minCoeff() >= floor - 1e-12) {
        res.p = p;
        res.objective = p.dot(S * p);
        res.kkt_residual = kkt_residual(S, p, floor);
        res.used_closed_form = true;
        return res;
      }
    }
  }

  // Primal active set. Starts from the uniform vector, which is feasible
  // because floor < 1/N.
  Eigen::VectorXd p = Eigen::VectorXd::Constant(N, 1.0 / N);
  std::vector<char> at_floor(N, 0);
  const int max_iter = 50 + 10 * N;

  for (int iter = 0; iter < max_iter; ++iter) {
    res.iterations = iter + 1;
    std::vector<int> F, A;
    for (int i = 0; i < N; ++i) (at_floor[i] ? A : F).push_back(i);
    const int nf = static_cast<int>(F.size());
    if (nf == 0) throw NumericError("active-set QP lost all free variables");

    Eigen::MatrixXd SFF(nf, nf);
    for (int a = 0; a < nf; ++a)
      for (int b = 0; b < nf; ++b) SFF(a, b) = S(F[a], F[b]);
    Eigen::LDLT<Eigen::MatrixXd> sub(SFF);
    if (sub.info() != Eigen::Success) throw NumericError("active-set QP subproblem failed");

    // rhs of the pinned-variable coupling: (S_FA a)_F with a = floor on A
    Eigen::VectorXd coup = Eigen::VectorXd::Zero(nf);
    if (!A.empty() && floor > 0.0)
      for (int a = 0; a < nf; ++a) {
        double s = 0.0;
        for (int j : A) s += S(F[a], j);
        coup[a] = floor * s;
      }

    const Eigen::VectorXd onesF = Eigen::VectorXd::Ones(nf);
    const Eigen::VectorXd u = refined_solve(sub, SFF, onesF);
    const Eigen::VectorXd v = refined_solve(sub, SFF, coup);
    const double mfree = 1.0 - floor * static_cast<double>(A.size());
    const double usum = u.sum();
    if (usum == 0.0) throw NumericError("active-set QP subproblem is singular");
    const Eigen::VectorXd q = -v + ((mfree + v.sum()) / usum) * u;

    Eigen::VectorXd d(nf);
    for (int a = 0; a < nf; ++a) d[a] = q[a] - p[F[a]];

    if (d.cwiseAbs().maxCoeff() <= 1e-12) {
      const Eigen::VectorXd g = 2.0 * (S * p);
      double lam = 0.0;
      for (int i : F) lam += g[i];
      lam = -lam / nf;
      int worst = -1;
      double worst_mu = -1e-9 * scale;
      for (int i : A) {
        const double mu = g[i] + lam;
        if (mu < worst_mu) {
          worst_mu = mu;
          worst = i;
        }
      }
      if (worst < 0) break;  // KKT satisfied
      at_floor[worst] = 0;
      continue;
    }

    double t = 1.0;
    int blocker = -1;
    for (int a = 0; a < nf; ++a)
      if (d[a] < 0.0) {
        const double ta = (floor - p[F[a]]) / d[a];
        if (ta < t) {
          t = ta;
          blocker = F[a];
        }
      }
    for (int a = 0; a < nf; ++a) p[F[a]] += t * d[a];
    if (blocker >= 0) {
      p[blocker] = floor;
      at_floor[blocker] = 1;
    }
    if (res.iterations == max_iter)
      throw NumericError("active-set QP did not converge in " + std::to_string(max_iter) +
                         " iterations");
  }

  res.p = p;
  res.objective = p.dot(S * p);
  res.kkt_residual = kkt_residual(S, p, floor);
  return res;
}

QpResult solve_weights_qp(const SigmaMatrix& sigma, double floor) {
  return solve_weights_qp(sigma.entries, floor);
}

}  // namespace brmax
