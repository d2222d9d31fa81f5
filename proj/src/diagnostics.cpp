#include "brmax/diagnostics.hpp"

#include <algorithm>
#include <cmath>

namespace brmax {

CInfEstimate estimate_c_inf(const GaussianModel& m, long n_mc, std::uint64_t seed,
                            int n_threads) {
  if (n_mc < 2) throw NumericError("estimate_c_inf needs n_mc >= 2");

  struct Partial {
    double sum = 0.0, sumsq = 0.0;
  };
  double sum = 0.0, sumsq = 0.0;

  auto work = [&](int b) -> Partial {
    Partial part;
    const auto [lo, hi] = block_range(n_mc, kMcBlocks, b);
    if (lo == hi) return part;
    Rng rng(seed, streams::block(streams::kCInf, static_cast<std::uint64_t>(b)));
    for (long r = lo; r < hi; ++r) {
      const double u = std::exp(sample_spectral(m, rng).w.maxCoeff());
      part.sum += u;
      part.sumsq += u * u;
    }
    return part;
  };
  run_ordered_blocks(kMcBlocks, n_threads, work, [&](int, Partial part) {
    sum += part.sum;
    sumsq += part.sumsq;
  });

  CInfEstimate est;
  est.n_mc = n_mc;
  const double n = static_cast<double>(n_mc);
  est.value = sum / n;
  const double var = std::max(0.0, (sumsq / n - est.value * est.value) * n / (n - 1.0));
  est.se = std::sqrt(var / n);
  return est;
}

Eigen::VectorXd acf_series(const Eigen::VectorXd& x, int max_lag) {
  const long n = x.size();
  if (max_lag < 0) throw NumericError("max_lag must be >= 0");
  if (n <= max_lag) throw NumericError("series length must exceed max_lag");

  const double mean = x.mean();
  const Eigen::VectorXd d = x.array() - mean;
  const double c0 = d.squaredNorm() / static_cast<double>(n);
  if (c0 <= 1e-20 * std::max(1.0, mean * mean))
    throw NumericError("autocorrelation undefined for a constant series");

  Eigen::VectorXd acf(max_lag + 1);
  acf[0] = 1.0;
  for (int k = 1; k <= max_lag; ++k) {
    const double ck = d.head(n - k).dot(d.tail(n - k)) / static_cast<double>(n);
    acf[k] = ck / c0;
  }
  return acf;
}

Eigen::VectorXd acf_sup_stat(const Chain& chain, int max_lag) {
  return acf_series(chain.sup_stat.array().exp(), max_lag);
}

double effective_sample_size(const Eigen::VectorXd& acf, long n) {
  if (n < 1) throw NumericError("chain length must be >= 1");
  if (acf.size() < 1) throw NumericError("acf must include lag 0");
  double tau = -acf[0];
  for (int m = 0; 2 * m + 1 < acf.size(); ++m) {
    const double pair = acf[2 * m] + acf[2 * m + 1];
    if (pair <= 0.0) break;
    tau += 2.0 * pair;
  }
  tau = std::max(tau, 1e-12);
  const double ess = static_cast<double>(n) / tau;
  return std::clamp(ess, 1.0, static_cast<double>(n));
}

Eigen::VectorXd argmax_frequencies(const std::vector<int>& argmax_index, int n_sites) {
  if (argmax_index.empty()) throw NumericError("argmax_frequencies needs at least one sample");
  Eigen::VectorXd freq = Eigen::VectorXd::Zero(n_sites);
  for (int idx : argmax_index) {
    if (idx < 0 || idx >= n_sites) throw NumericError("argmax index out of range");
    freq[idx] += 1.0;
  }
  return freq / static_cast<double>(argmax_index.size());
}

Eigen::VectorXd argmax_frequencies(const Chain& chain, int n_sites) {
  return argmax_frequencies(chain.argmax_index, n_sites);
}

Eigen::VectorXd argmax_frequencies(const SampleBatch& batch, int n_sites) {
  return argmax_frequencies(batch.argmax_index, n_sites);
}

}  // namespace brmax
