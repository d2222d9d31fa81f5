#ifndef BRMAX_WEIGHTS_QP_HPP
#define BRMAX_WEIGHTS_QP_HPP

#include <Eigen/Dense>
#include <cstdint>

#include "brmax/model.hpp"

namespace brmax {

// Monte-Carlo estimate of Sigma_ik = E exp(W^(i)_k - max_j W^(i)_j),
// the expected contribution of site k to the sup when the spectral field
// is shifted to component i. Symmetrized; entries lie in (0, 1].
struct SigmaMatrix {
  Eigen::MatrixXd entries;  // N x N
  Eigen::MatrixXd se;       // per-entry standard errors
  long n_mc = 0;
};

// One shared base draw per replicate serves every shift i, so the estimate
// costs O(n_mc N^2) instead of O(n_mc N^3). Deterministic for fixed seed,
// independent of n_threads.
SigmaMatrix estimate_sigma(const GaussianModel& m, long n_mc, std::uint64_t seed,
                           int n_threads = 0);

// min p^T Sigma p  s.t.  sum p = 1,  p >= floor.
struct QpResult {
  Eigen::VectorXd p;
  double objective = 0.0;
  double kkt_residual = 0.0;
  bool used_closed_form = false;
  bool regularized = false;
  int iterations = 0;
};

// Tries the equality-constrained closed form Sigma^{-1} 1 / (1^T Sigma^{-1} 1)
// first; falls back to a primal active-set iteration when that violates the
// floor. An indefinite Sigma (possible for a noisy estimate) is shifted by
// 1e-10 * trace/N on the diagonal and flagged.
QpResult solve_weights_qp(const Eigen::MatrixXd& sigma, double floor = 0.0);
QpResult solve_weights_qp(const SigmaMatrix& sigma, double floor = 0.0);

}  // namespace brmax

#endif  // BRMAX_WEIGHTS_QP_HPP
