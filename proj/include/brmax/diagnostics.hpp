#ifndef BRMAX_DIAGNOSTICS_HPP
#define BRMAX_DIAGNOSTICS_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "brmax/samplers.hpp"

namespace brmax {

// Monte-Carlo estimate of the extremal coefficient c_inf = E max_i e^{W_i}.
// Always lies in [1, N] up to sampling error.
struct CInfEstimate {
  double value = 0.0;
  double se = 0.0;
  long n_mc = 0;
};
CInfEstimate estimate_c_inf(const GaussianModel& m, long n_mc, std::uint64_t seed,
                            int n_threads = 0);

// Biased (1/n) autocorrelation estimator of a scalar series, lags 0..max_lag.
// Throws NumericError on a (numerically) constant series.
Eigen::VectorXd acf_series(const Eigen::VectorXd& x, int max_lag);

// ACF of the chain's sup statistic max_i e^{w_i}.
Eigen::VectorXd acf_sup_stat(const Chain& chain, int max_lag);

// n / integrated autocorrelation time, with the Geyer initial-positive-
// sequence truncation (stop at the first nonpositive lag pair), clamped to
// [1, n].
double effective_sample_size(const Eigen::VectorXd& acf, long n);

// Empirical distribution of the argmax site.
Eigen::VectorXd argmax_frequencies(const std::vector<int>& argmax_index, int n_sites);
Eigen::VectorXd argmax_frequencies(const Chain& chain, int n_sites);
Eigen::VectorXd argmax_frequencies(const SampleBatch& batch, int n_sites);

struct DiagnosticsReport {
  double acceptance_rate = 0.0;
  Eigen::VectorXd acf;
  double ess = 0.0;
  CInfEstimate c_inf;
  Eigen::VectorXd argmax_freq;
};

}  // namespace brmax

#endif  // BRMAX_DIAGNOSTICS_HPP
