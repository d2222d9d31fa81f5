#include "brmax/gauss.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace brmax {

namespace {

// F z with z standard normal in rank dimensions, so every draw consumes
// exactly `rank` normals regardless of degeneracies.
Eigen::VectorXd draw_colored(const GaussianModel& m, Rng& rng) {
  Eigen::VectorXd z(m.rank);
  for (int k = 0; k < m.rank; ++k) z[k] = rng.normal();
  return m.chol * z;
}

}  // namespace

SpectralSample sample_spectral(const GaussianModel& m, Rng& rng) {
  SpectralSample s;
  s.w = draw_colored(m, rng) - 0.5 * m.sigma;
  return s;
}

SpectralSample sample_inflated(const GaussianModel& m, int i, double epsilon, Rng& rng) {
  if (i < 0 || i >= m.n()) throw NumericError("component index out of range");
  if (!(epsilon >= 0.0) || epsilon >= 1.0)
    throw NumericError("inflation epsilon must lie in [0, 1)");
  const double inv = 1.0 / std::sqrt(1.0 - epsilon);  // exactly 1.0 at epsilon = 0
  SpectralSample s;
  s.w = draw_colored(m, rng) * inv + (m.C.col(i) - 0.5 * m.sigma);
  s.source_index = i;
  return s;
}

SpectralSample sample_shifted(const GaussianModel& m, int i, Rng& rng) {
  return sample_inflated(m, i, 0.0, rng);
}

ProposalMixture::ProposalMixture(const GaussianModel& m, Eigen::VectorXd p, double eps)
    : model(&m), weights(std::move(p)), epsilon(eps) {
  if (weights.size() != m.n()) throw NumericError("mixture weight length does not match grid");
  if (weights.minCoeff() < 0.0) throw NumericError("mixture weights must be nonnegative");
  const double s = weights.sum();
  if (std::abs(s - 1.0) > 1e-9) throw NumericError("mixture weights must sum to 1");
  if (!(epsilon >= 0.0) || epsilon >= 1.0) throw NumericError("epsilon must lie in [0, 1)");
}

ProposalMixture ProposalMixture::uniform(const GaussianModel& m, double eps) {
  return ProposalMixture(m, Eigen::VectorXd::Constant(m.n(), 1.0 / m.n()), eps);
}

int pick_component(const Eigen::VectorXd& p, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  int last_positive = -1;
  for (int i = 0; i < p.size(); ++i) {
    if (p[i] <= 0.0) continue;
    last_positive = i;
    acc += p[i];
    if (u < acc) return i;
  }
  return last_positive;  // u landed in the rounding slack at the top
}

SpectralSample sample_mixture(const ProposalMixture& mix, Rng& rng) {
  const int k = pick_component(mix.weights, rng);
  return sample_inflated(*mix.model, k, mix.epsilon, rng);
}

DensityRatioTerms log_density_ratio_terms(const ProposalMixture& mix, const Eigen::VectorXd& w,
                                          bool with_quad) {
  const GaussianModel& m = *mix.model;
  if (w.size() != m.n()) throw NumericError("state length does not match grid");
  DensityRatioTerms t;
  t.sup = w.maxCoeff();

  const double om = 1.0 - mix.epsilon;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < w.size(); ++i)
    if (mix.weights[i] > 0.0) best = std::max(best, std::log(mix.weights[i]) + om * w[i]);
  double s = 0.0;
  for (int i = 0; i < w.size(); ++i)
    if (mix.weights[i] > 0.0) s += std::exp(std::log(mix.weights[i]) + om * w[i] - best);
  t.mix_logsumexp = best + std::log(s);

  if (with_quad) t.quad_form = m.quad_form(w);
  return t;
}

}  // namespace brmax
