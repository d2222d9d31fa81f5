#include "brmax/samplers.hpp"

#include <cmath>
#include <limits>

namespace brmax {

namespace {

// log of the importance score whose ratio drives the chain:
// SupOnly: max_i w_i.  MixtureInformed: max_i w_i - log mix(w) up to the
// base Gaussian factor and the (1-eps)^{rank/2} constant, which cancel in
// the ratio. The quadratic term is state dependent and kept when eps > 0.
double log_score(const ProposalMixture& mix, McmcVariant v, const Eigen::VectorXd& w) {
  if (v == McmcVariant::SupOnly) return w.maxCoeff();
  const bool inflated = mix.epsilon > 0.0;
  const DensityRatioTerms t = log_density_ratio_terms(mix, w, /*with_quad=*/inflated);
  double s = t.sup - t.mix_logsumexp;
  if (inflated) s -= 0.5 * mix.epsilon * t.quad_form;
  return s;
}

int argmax_lowest(const Eigen::VectorXd& w) {
  int idx = 0;
  w.maxCoeff(&idx);  // Eigen returns the first maximizer
  return idx;
}

double log_rejection_acceptance(const ProposalMixture& mix, double c,
                                const Eigen::VectorXd& w) {
  if (!(c > 0.0)) throw NumericError("bound constant must be > 0");
  const bool inflated = mix.epsilon > 0.0;
  const DensityRatioTerms t = log_density_ratio_terms(mix, w, /*with_quad=*/inflated);
  double la = std::log(c) + t.sup - t.mix_logsumexp;
  if (inflated) {
    la -= 0.5 * mix.model->rank * std::log(1.0 - mix.epsilon);
    la -= 0.5 * mix.epsilon * t.quad_form;
  }
  if (la > std::log1p(1e-9))
    throw NumericError("rejection acceptance exceeded 1: the bound constant is not valid");
  return la;
}

}  // namespace

double mcmc_acceptance(const ProposalMixture& mix, McmcVariant v, const Eigen::VectorXd& w_old,
                       const Eigen::VectorXd& w_new) {
  const double num = log_score(mix, v, w_new);
  const double den = log_score(mix, v, w_old);
  const double r = num - den;
  if (std::isnan(r)) return 0.0;  // 0/0 convention
  return std::min(1.0, std::exp(r));
}

Chain run_mcmc(const ProposalMixture& mix, McmcVariant v, const McmcOptions& opt, Rng& rng) {
  if (opt.n_steps < 1) throw NumericError("n_steps must be >= 1");
  if (opt.burn_in < 0) throw NumericError("burn_in must be >= 0");
  const GaussianModel& m = *mix.model;
  const int N = m.n();

  Chain chain;
  chain.variant = variant_name(v);
  chain.n_steps = opt.n_steps;
  chain.burn_in = opt.burn_in;
  chain.sup_stat.resize(opt.n_steps);
  chain.argmax_index.resize(opt.n_steps);
  chain.accept_flags.resize(opt.n_steps);
  if (opt.keep_states) chain.states.resize(opt.n_steps, N);

  auto propose = [&]() {
    return v == McmcVariant::SupOnly ? sample_spectral(m, rng) : sample_mixture(mix, rng);
  };

  Eigen::VectorXd w = propose().w;
  double score = log_score(mix, v, w);

  long accepted = 0;
  const long total = opt.burn_in + opt.n_steps;
  for (long step = 0; step < total; ++step) {
    const Eigen::VectorXd w_new = propose().w;
    const double score_new = log_score(mix, v, w_new);
    const double lr = score_new - score;
    bool accept = false;
    if (!std::isnan(lr)) {
      const double u = rng.uniform();
      accept = std::log(u) < lr;
    }
    if (accept) {
      w = w_new;
      score = score_new;
      ++accepted;
    }
    const long rec = step - opt.burn_in;
    if (rec >= 0) {
      chain.sup_stat[rec] = w.maxCoeff();
      chain.argmax_index[rec] = argmax_lowest(w);
      chain.accept_flags[rec] = accept ? 1 : 0;
      if (opt.keep_states) chain.states.row(rec) = w.transpose();
      if (opt.sink) opt.sink(w, accept);
    }
  }
  chain.acceptance_rate = static_cast<double>(accepted) / static_cast<double>(total);
  return chain;
}

double rejection_acceptance(const ProposalMixture& mix, double c, const Eigen::VectorXd& w) {
  return std::min(1.0, std::exp(log_rejection_acceptance(mix, c, w)));
}

double rejection_constant_uniform(const Eigen::VectorXd& p) {
  if (p.size() == 0) throw NumericError("weight vector is empty");
  const double c = p.minCoeff();
  if (!(c > 0.0))
    throw NumericError("the plain-mixture bound constant min_i p_i must be positive");
  return c;
}

SampleBatch run_rejection(const ProposalMixture& mix, double bound_constant,
                          const RejectionOptions& opt, std::uint64_t seed) {
  if (opt.n_samples < 1) throw NumericError("n_samples must be >= 1");
  if (!(bound_constant > 0.0)) throw NumericError("bound constant must be > 0");
  const GaussianModel& m = *mix.model;
  const int N = m.n();
  const long n = opt.n_samples;

  SampleBatch batch;
  batch.variant = mix.epsilon > 0.0 ? "2B" : "2A";
  batch.sup_stat.resize(n);
  batch.argmax_index.resize(n);
  batch.proposal_counts.resize(n);
  if (opt.keep_states) batch.states.resize(n, N);

  struct Partial {
    Eigen::MatrixXd states;  // filled only when kept or a sink is attached
    Eigen::VectorXd sup;
    std::vector<int> amax;
    std::vector<long> counts;
  };
  const bool keep_block_states = opt.keep_states || static_cast<bool>(opt.sink);

  auto work = [&](int b) -> Partial {
    Partial part;
    const auto [lo, hi] = block_range(n, kMcBlocks, b);
    const long cnt = hi - lo;
    part.sup.resize(cnt);
    part.amax.resize(cnt);
    part.counts.resize(cnt);
    if (keep_block_states && cnt > 0) part.states.resize(cnt, N);
    if (cnt == 0) return part;
    Rng rng(seed, streams::block(streams::kRejection, static_cast<std::uint64_t>(b)));
    for (long s = 0; s < cnt; ++s) {
      long tries = 0;
      for (;;) {
        ++tries;
        const SpectralSample smp = sample_mixture(mix, rng);
        const double la = log_rejection_acceptance(mix, bound_constant, smp.w);
        const double u = rng.uniform();
        if (std::log(u) < la) {
          part.sup[s] = smp.w.maxCoeff();
          part.amax[s] = argmax_lowest(smp.w);
          part.counts[s] = tries;
          if (keep_block_states) part.states.row(s) = smp.w.transpose();
          break;
        }
      }
    }
    return part;
  };

  run_ordered_blocks(kMcBlocks, opt.n_threads, work, [&](int b, Partial part) {
    const auto [lo, hi] = block_range(n, kMcBlocks, b);
    for (long s = 0; s < hi - lo; ++s) {
      batch.sup_stat[lo + s] = part.sup[s];
      batch.argmax_index[lo + s] = part.amax[s];
      batch.proposal_counts[lo + s] = part.counts[s];
      batch.total_proposals += part.counts[s];
      if (opt.keep_states) batch.states.row(lo + s) = part.states.row(s);
      if (opt.sink) opt.sink(part.states.row(s).transpose(), part.counts[s]);
    }
  });

  batch.mean_proposals = static_cast<double>(batch.total_proposals) / static_cast<double>(n);
  return batch;
}

}  // namespace brmax
