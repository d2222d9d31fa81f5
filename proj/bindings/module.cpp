#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "brmax/diagnostics.hpp"
#include "brmax/oracle.hpp"
#include "brmax/weights_lp.hpp"
#include "brmax/weights_qp.hpp"

namespace py = pybind11;
using namespace brmax;

PYBIND11_MODULE(_core, mod) {
  mod.doc() = "Sup-normalized spectral sampling for Brown-Resnick max-stable processes";

  py::register_exception<ConfigError>(mod, "ConfigError");
  py::register_exception<ModelError>(mod, "ModelError");
  py::register_exception<NumericError>(mod, "NumericError");

  py::class_<Rng>(mod, "Rng")
      .def(py::init<std::uint64_t, std::uint64_t>(), py::arg("seed"), py::arg("stream") = 0)
      .def("uniform", &Rng::uniform)
      .def("normal", &Rng::normal);

  py::class_<Grid::AxisRange>(mod, "AxisRange")
      .def(py::init([](double start, double step, double stop) {
             return Grid::AxisRange{start, step, stop};
           }),
           py::arg("start"), py::arg("step"), py::arg("stop"))
      .def_readonly("start", &Grid::AxisRange::start)
      .def_readonly("step", &Grid::AxisRange::step)
      .def_readonly("stop", &Grid::AxisRange::stop);

  py::class_<Grid>(mod, "Grid")
      .def(py::init([](Eigen::MatrixXd points) {
             Grid g;
             g.points = std::move(points);
             g.validate();
             return g;
           }),
           py::arg("points"))
      .def_static("lattice", &Grid::lattice, py::arg("axes"))
      .def_readonly("points", &Grid::points)
      .def_property_readonly("n", &Grid::n)
      .def_property_readonly("dim", &Grid::dim)
      .def("point", &Grid::point, py::arg("i"));

  py::class_<Variogram>(mod, "Variogram")
      .def(py::init<double, double>(), py::arg("scale"), py::arg("exponent"))
      .def_readonly("scale", &Variogram::scale)
      .def_readonly("exponent", &Variogram::exponent)
      .def("__call__", &Variogram::operator(), py::arg("h"));

  py::class_<AnchorSpec>(mod, "AnchorSpec")
      .def_static("at_point", &AnchorSpec::at_point, py::arg("point"))
      .def_static("corner_average", &AnchorSpec::corner_average);

  py::class_<GaussianModel>(mod, "GaussianModel")
      .def_readonly("grid", &GaussianModel::grid)
      .def_readonly("C", &GaussianModel::C)
      .def_readonly("sigma", &GaussianModel::sigma)
      .def_readonly("chol", &GaussianModel::chol)
      .def_readonly("chol_red", &GaussianModel::chol_red)
      .def_readonly("active", &GaussianModel::active)
      .def_readonly("rank", &GaussianModel::rank)
      .def_readonly("degenerate_index", &GaussianModel::degenerate_index)
      .def_property_readonly("n", &GaussianModel::n)
      .def_property_readonly("effective_dim", &GaussianModel::effective_dim)
      .def("quad_form", &GaussianModel::quad_form, py::arg("w"))
      .def("variogram_matrix", &GaussianModel::variogram_matrix);

  mod.def("build_model", &build_model, py::arg("grid"), py::arg("variogram"), py::arg("anchor"));

  py::class_<SpectralSample>(mod, "SpectralSample")
      .def_readonly("w", &SpectralSample::w)
      .def_readonly("source_index", &SpectralSample::source_index);

  mod.def("sample_spectral", &sample_spectral, py::arg("model"), py::arg("rng"));
  mod.def("sample_shifted", &sample_shifted, py::arg("model"), py::arg("i"), py::arg("rng"));
  mod.def("sample_inflated", &sample_inflated, py::arg("model"), py::arg("i"), py::arg("epsilon"),
          py::arg("rng"));

  py::class_<ProposalMixture>(mod, "ProposalMixture")
      .def(py::init<const GaussianModel&, Eigen::VectorXd, double>(), py::arg("model"),
           py::arg("weights"), py::arg("epsilon") = 0.0, py::keep_alive<1, 2>())
      .def_static("uniform", &ProposalMixture::uniform, py::arg("model"), py::arg("epsilon") = 0.0,
                  py::keep_alive<0, 1>())
      .def_readonly("weights", &ProposalMixture::weights)
      .def_readonly("epsilon", &ProposalMixture::epsilon);

  mod.def("sample_mixture", &sample_mixture, py::arg("mixture"), py::arg("rng"));

  py::class_<DensityRatioTerms>(mod, "DensityRatioTerms")
      .def_readonly("sup", &DensityRatioTerms::sup)
      .def_readonly("mix_logsumexp", &DensityRatioTerms::mix_logsumexp)
      .def_readonly("quad_form", &DensityRatioTerms::quad_form);

  mod.def("log_density_ratio_terms", &log_density_ratio_terms, py::arg("mixture"), py::arg("w"),
          py::arg("with_quad") = true);

  py::class_<SigmaMatrix>(mod, "SigmaMatrix")
      .def_readonly("entries", &SigmaMatrix::entries)
      .def_readonly("se", &SigmaMatrix::se)
      .def_readonly("n_mc", &SigmaMatrix::n_mc);

  mod.def("estimate_sigma", &estimate_sigma, py::arg("model"), py::arg("n_mc"), py::arg("seed"),
          py::arg("n_threads") = 0);

  py::class_<QpResult>(mod, "QpResult")
      .def_readonly("p", &QpResult::p)
      .def_readonly("objective", &QpResult::objective)
      .def_readonly("kkt_residual", &QpResult::kkt_residual)
      .def_readonly("used_closed_form", &QpResult::used_closed_form)
      .def_readonly("regularized", &QpResult::regularized)
      .def_readonly("iterations", &QpResult::iterations);

  mod.def(
      "solve_weights_qp",
      [](const Eigen::MatrixXd& sigma, double floor) { return solve_weights_qp(sigma, floor); },
      py::arg("sigma"), py::arg("floor") = 0.0);

  py::class_<PartitionSet>(mod, "PartitionSet")
      .def_readonly("groups", &PartitionSet::groups)
      .def_readonly("tol", &PartitionSet::tol);

  mod.def("build_partitions", &build_partitions, py::arg("model"), py::arg("tol") = 1e-9);
  mod.def("c_lower_bound", &c_lower_bound, py::arg("model"), py::arg("I"), py::arg("j"),
          py::arg("eps"), py::arg("lambda_"));
  mod.def("c_groups", &c_groups, py::arg("model"), py::arg("partitions"), py::arg("p"),
          py::arg("eps"));

  py::class_<BoundCoefficients>(mod, "BoundCoefficients")
      .def_readonly("c", &BoundCoefficients::c)
      .def_readonly("epsilon", &BoundCoefficients::epsilon);

  mod.def("bound_cost_matrix", &bound_cost_matrix, py::arg("model"), py::arg("partitions"),
          py::arg("lambda_source"), py::arg("eps"));

  py::class_<LpResult>(mod, "LpResult")
      .def_readonly("p", &LpResult::p)
      .def_readonly("objective", &LpResult::objective)
      .def_readonly("iterations", &LpResult::iterations)
      .def_readonly("bland_activated", &LpResult::bland_activated)
      .def_readonly("duals", &LpResult::duals);

  mod.def("solve_lp_simplex", &solve_lp_simplex, py::arg("costs"));

  py::class_<ProposalOptResult::IterRecord>(mod, "ProposalIterRecord")
      .def_readonly("iter", &ProposalOptResult::IterRecord::iter)
      .def_readonly("lp_objective", &ProposalOptResult::IterRecord::lp_objective)
      .def_readonly("epsilon", &ProposalOptResult::IterRecord::epsilon)
      .def_readonly("c_groups_value", &ProposalOptResult::IterRecord::c_groups_value);

  py::class_<ProposalOptResult>(mod, "ProposalOptResult")
      .def_readonly("p", &ProposalOptResult::p)
      .def_readonly("epsilon", &ProposalOptResult::epsilon)
      .def_readonly("c_groups_value", &ProposalOptResult::c_groups_value)
      .def_readonly("stalled", &ProposalOptResult::stalled)
      .def_readonly("trace", &ProposalOptResult::trace);

  mod.def("optimize_proposal", &optimize_proposal, py::arg("model"), py::arg("partitions"),
          py::arg("eps0") = 0.01, py::arg("max_iter") = 20, py::arg("tol") = 1e-4);

  py::enum_<McmcVariant>(mod, "McmcVariant")
      .value("SupOnly", McmcVariant::SupOnly)
      .value("MixtureInformed", McmcVariant::MixtureInformed);

  mod.def("mcmc_acceptance", &mcmc_acceptance, py::arg("mixture"), py::arg("variant"),
          py::arg("w_old"), py::arg("w_new"));

  py::class_<Chain>(mod, "Chain")
      .def_readonly("variant", &Chain::variant)
      .def_readonly("states", &Chain::states)
      .def_readonly("sup_stat", &Chain::sup_stat)
      .def_readonly("argmax_index", &Chain::argmax_index)
      .def_readonly("accept_flags", &Chain::accept_flags)
      .def_readonly("acceptance_rate", &Chain::acceptance_rate)
      .def_readonly("n_steps", &Chain::n_steps)
      .def_readonly("burn_in", &Chain::burn_in);

  mod.def(
      "run_mcmc",
      [](const ProposalMixture& mix, McmcVariant v, long n_steps, long burn_in, bool keep_states,
         Rng& rng) {
        McmcOptions opt;
        opt.n_steps = n_steps;
        opt.burn_in = burn_in;
        opt.keep_states = keep_states;
        return run_mcmc(mix, v, opt, rng);
      },
      py::arg("mixture"), py::arg("variant"), py::arg("n_steps"), py::arg("burn_in") = 1000,
      py::arg("keep_states") = false, py::arg("rng"));

  mod.def("rejection_acceptance", &rejection_acceptance, py::arg("mixture"), py::arg("c"),
          py::arg("w"));
  mod.def("rejection_constant_uniform", &rejection_constant_uniform, py::arg("p"));

  py::class_<SampleBatch>(mod, "SampleBatch")
      .def_readonly("variant", &SampleBatch::variant)
      .def_readonly("states", &SampleBatch::states)
      .def_readonly("sup_stat", &SampleBatch::sup_stat)
      .def_readonly("argmax_index", &SampleBatch::argmax_index)
      .def_readonly("proposal_counts", &SampleBatch::proposal_counts)
      .def_readonly("total_proposals", &SampleBatch::total_proposals)
      .def_readonly("mean_proposals", &SampleBatch::mean_proposals);

  mod.def(
      "run_rejection",
      [](const ProposalMixture& mix, double bound_constant, long n_samples, bool keep_states,
         int n_threads, std::uint64_t seed) {
        RejectionOptions opt;
        opt.n_samples = n_samples;
        opt.keep_states = keep_states;
        opt.n_threads = n_threads;
        return run_rejection(mix, bound_constant, opt, seed);
      },
      py::arg("mixture"), py::arg("bound_constant"), py::arg("n_samples"),
      py::arg("keep_states") = true, py::arg("n_threads") = 0, py::arg("seed"));

  py::class_<OracleTables>(mod, "OracleTables")
      .def_readonly("Q", &OracleTables::Q)
      .def_readonly("m", &OracleTables::m)
      .def_readonly("argmax_probs", &OracleTables::argmax_probs)
      .def_readonly("argmax_se", &OracleTables::argmax_se)
      .def_readonly("cond_mean", &OracleTables::cond_mean)
      .def_readonly("cond_chol", &OracleTables::cond_chol)
      .def_readonly("n_cdf_mc", &OracleTables::n_cdf_mc);

  mod.def("ho_dombry_tables", &ho_dombry_tables, py::arg("model"), py::arg("n_cdf_mc"),
          py::arg("rng"));
  mod.def("ho_dombry_sample", &ho_dombry_sample, py::arg("tables"), py::arg("model"),
          py::arg("rng"));

  py::class_<ResampleResult>(mod, "ResampleResult")
      .def_readonly("batch", &ResampleResult::batch)
      .def_readonly("mean_weight", &ResampleResult::mean_weight);

  mod.def("resampling_oracle", &resampling_oracle, py::arg("model"), py::arg("n_pool"),
          py::arg("n_out"), py::arg("rng"));

  py::class_<CInfEstimate>(mod, "CInfEstimate")
      .def_readonly("value", &CInfEstimate::value)
      .def_readonly("se", &CInfEstimate::se)
      .def_readonly("n_mc", &CInfEstimate::n_mc);

  mod.def("estimate_c_inf", &estimate_c_inf, py::arg("model"), py::arg("n_mc"), py::arg("seed"),
          py::arg("n_threads") = 0);
  mod.def("acf_series", &acf_series, py::arg("x"), py::arg("max_lag"));
  mod.def("acf_sup_stat", &acf_sup_stat, py::arg("chain"), py::arg("max_lag"));
  mod.def("effective_sample_size", &effective_sample_size, py::arg("acf"), py::arg("n"));
  mod.def(
      "argmax_frequencies",
      [](const std::vector<int>& idx, int n_sites) { return argmax_frequencies(idx, n_sites); },
      py::arg("argmax_index"), py::arg("n_sites"));
}
