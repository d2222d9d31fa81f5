#ifndef BRMAX_SAMPLERS_HPP
#define BRMAX_SAMPLERS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "brmax/gauss.hpp"

namespace brmax {

enum class McmcVariant { SupOnly, MixtureInformed };

inline const char* variant_name(McmcVariant v) {
  return v == McmcVariant::SupOnly ? "1A" : "1B";
}

// Acceptance probability of the independence sampler move w_old -> w_new.
// SupOnly proposes from the base spectral law and weighs by the sup;
// MixtureInformed proposes from the mixture and weighs by sup over mixture
// density. A 0/0 ratio is interpreted as 0 (reject).
double mcmc_acceptance(const ProposalMixture& mix, McmcVariant v, const Eigen::VectorXd& w_old,
                       const Eigen::VectorXd& w_new);

struct McmcOptions {
  long n_steps = 0;      // recorded steps after burn-in
  long burn_in = 1000;
  bool keep_states = false;
  // Called once per recorded step, in order.
  std::function<void(const Eigen::VectorXd& w, bool accepted)> sink;
};

struct Chain {
  std::string variant;
  Eigen::MatrixXd states;            // n_steps x N when keep_states
  Eigen::VectorXd sup_stat;          // max_i w_i per recorded step
  std::vector<int> argmax_index;     // ties resolved to the lowest index
  std::vector<std::uint8_t> accept_flags;
  double acceptance_rate = 0.0;      // over all steps, burn-in included
  long n_steps = 0;
  long burn_in = 0;
};

// Independence Metropolis-Hastings targeting the sup-normalized spectral
// law. The initial state is a fresh proposal draw and is not counted.
Chain run_mcmc(const ProposalMixture& mix, McmcVariant v, const McmcOptions& opt, Rng& rng);

// Acceptance probability of a rejection proposal w given bound constant c:
//   c * (1-eps)^{-rank/2} exp(max_i w_i - LSE_eps(w) - (eps/2) quad(w)).
// Throws NumericError if the value exceeds 1 + 1e-9, which means c was not
// a valid lower bound.
double rejection_acceptance(const ProposalMixture& mix, double c, const Eigen::VectorXd& w);

// Bound constant that makes the plain shifted mixture (eps = 0) exact.
double rejection_constant_uniform(const Eigen::VectorXd& p);

struct RejectionOptions {
  long n_samples = 0;
  bool keep_states = true;
  int n_threads = 0;
  std::function<void(const Eigen::VectorXd& w, long proposals)> sink;
};

struct SampleBatch {
  std::string variant;
  Eigen::MatrixXd states;             // n_samples x N when keep_states
  Eigen::VectorXd sup_stat;
  std::vector<int> argmax_index;
  std::vector<long> proposal_counts;  // accepted draw included
  long total_proposals = 0;
  double mean_proposals = 0.0;
};

// Exact sampler: proposes from the mixture until acceptance. Work is split
// into fixed blocks with independent substreams, so the output depends on
// the seed but not on the thread count.
SampleBatch run_rejection(const ProposalMixture& mix, double bound_constant,
                          const RejectionOptions& opt, std::uint64_t seed);

}  // namespace brmax

#endif  // BRMAX_SAMPLERS_HPP
