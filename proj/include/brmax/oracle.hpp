#ifndef BRMAX_ORACLE_HPP
#define BRMAX_ORACLE_HPP

#include <Eigen/Dense>
#include <vector>

#include "brmax/gauss.hpp"
#include "brmax/samplers.hpp"

namespace brmax {

// Exact two-step construction of the sup-normalized spectral law for small N:
// argmax probabilities from the Q/m tables, then a truncated Gaussian for the
// non-argmax coordinates. Serves as ground truth for the main samplers.
struct OracleTables {
  Eigen::MatrixXd Q;  // C^{-1} - C^{-1} 1 1^T C^{-1} / (1^T C^{-1} 1); Q 1 = 0
  Eigen::VectorXd m;  // -C^{-1} (sigma/2 + beta 1), beta = (1 - sigma^T C^{-1} 1 / 2) / (1^T C^{-1} 1)
  Eigen::VectorXd argmax_probs;
  Eigen::VectorXd argmax_se;
  std::vector<Eigen::VectorXd> cond_mean;  // per argmax i: Q_{-i}^{-1} m_{-i}
  std::vector<Eigen::MatrixXd> cond_chol;  // per argmax i: lower factor of Q_{-i}^{-1}
  long n_cdf_mc = 0;
};

// Builds the tables. The (N-1)-dimensional Gaussian CDFs are estimated by
// Monte-Carlo orthant counting with n_cdf_mc draws (closed form at N = 2);
// their errors are pushed through the normalizing ratio by the delta method.
// Requires a nonsingular C: a grid-point anchor makes C singular, use the
// corner-average anchor (or an off-grid point) instead. N <= 6.
OracleTables ho_dombry_tables(const GaussianModel& m, long n_cdf_mc, Rng& rng);

// Step 2: draws the argmax index, then the remaining coordinates from
// N(Q_{-i}^{-1} m_{-i}, Q_{-i}^{-1}) conditioned on being nonpositive, by
// plain rejection. Output is sup-normalized: w has max 0 at the argmax.
// Throws NumericError after 1e7 rejected tries.
SpectralSample ho_dombry_sample(const OracleTables& tables, const GaussianModel& m, Rng& rng);

// Brute-force reference sampler: draws a pool from the base spectral law and
// resamples with weights max_i e^{w_i}. mean_weight estimates the extremal
// coefficient.
struct ResampleResult {
  SampleBatch batch;
  double mean_weight = 0.0;
};
ResampleResult resampling_oracle(const GaussianModel& m, long n_pool, long n_out, Rng& rng);

}  // namespace brmax

#endif  // BRMAX_ORACLE_HPP
