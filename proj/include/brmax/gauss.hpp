#ifndef BRMAX_GAUSS_HPP
#define BRMAX_GAUSS_HPP

#include <Eigen/Dense>

#include "brmax/model.hpp"

namespace brmax {

// One draw of the log spectral field. source_index is the mixture component
// the draw came from, or -1 for a plain (unshifted) draw.
struct SpectralSample {
  Eigen::VectorXd w;
  int source_index = -1;
};

// W = L z - sigma/2 with z standard normal on the active coordinates.
SpectralSample sample_spectral(const GaussianModel& m, Rng& rng);

// Component i of the shifted family: N(C_{.i} - sigma/2, C).
SpectralSample sample_shifted(const GaussianModel& m, int i, Rng& rng);

// Variance-inflated component: N(C_{.i} - sigma/2, C / (1 - epsilon)).
// epsilon = 0 reproduces sample_shifted exactly (same arithmetic, same
// stream consumption).
SpectralSample sample_inflated(const GaussianModel& m, int i, double epsilon, Rng& rng);

// Finite mixture over inflated components with weights p on the simplex.
struct ProposalMixture {
  const GaussianModel* model = nullptr;
  Eigen::VectorXd weights;
  double epsilon = 0.0;

  ProposalMixture(const GaussianModel& m, Eigen::VectorXd p, double eps = 0.0);
  static ProposalMixture uniform(const GaussianModel& m, double eps = 0.0);
};

// Inverse-CDF walk over the weight vector; deterministic for a given stream.
int pick_component(const Eigen::VectorXd& p, Rng& rng);

SpectralSample sample_mixture(const ProposalMixture& mix, Rng& rng);

// The three ingredients of the target-over-proposal density ratio at w:
//   sup           max_i w_i
//   mix_logsumexp log sum_{i: p_i > 0} exp(log p_i + (1 - eps) w_i)
//   quad_form     (w + sigma/2)^T C^{-1} (w + sigma/2)   (active block)
// with_quad = false skips the quadratic form (only needed when eps > 0).
struct DensityRatioTerms {
  double sup = 0.0;
  double mix_logsumexp = 0.0;
  double quad_form = 0.0;
};
DensityRatioTerms log_density_ratio_terms(const ProposalMixture& mix, const Eigen::VectorXd& w,
                                          bool with_quad = true);

}  // namespace brmax

#endif  // BRMAX_GAUSS_HPP
