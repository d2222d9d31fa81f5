#include <CLI11.hpp>

#include <cstdio>
#include <exception>
#include <string>

#include "brmax/commands.hpp"

namespace {

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "out";
  std::uint64_t seed = 0;
  bool seed_set = false;
  int threads = -1;
};

brmax::RunConfig resolve_config(const CommonArgs& args, bool builtin_s4) {
  brmax::RunConfig cfg;
  if (!args.config_path.empty())
    cfg = brmax::parse_config_file(args.config_path);
  else if (builtin_s4)
    cfg = brmax::section4_config();
  else
    throw brmax::ConfigError("--config is required for this subcommand");
  if (args.seed_set) {
    cfg.seed = args.seed;
    cfg.has_seed = true;
  }
  if (args.threads >= 0) cfg.threads = args.threads;
  cfg.out_dir = args.out_dir;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Sup-normalized spectral sampling for Brown-Resnick max-stable processes"};
  app.require_subcommand(1);

  CommonArgs args;
  app.add_option("--config", args.config_path, "Path to an INI run configuration")
      ->expected(1);
  app.add_option("--out", args.out_dir, "Output directory (default: out)");
  app.add_option("--seed", args.seed, "RNG seed (overrides the config)")
      ->each([&](const std::string&) { args.seed_set = true; });
  app.add_option("--threads", args.threads, "Worker threads, 0 = hardware (overrides the config)");
  app.fallthrough();

  auto* sub_qp = app.add_subcommand("weights-qp", "Estimate the sup-contribution matrix and solve for MCMC mixture weights");
  auto* sub_lp = app.add_subcommand("weights-lp", "Optimize rejection proposal weights and inflation via the bound LP");
  auto* sub_sample = app.add_subcommand("sample", "Run a sampler variant (1A, 1B, 2A, 2B) from the config");
  auto* sub_oracle = app.add_subcommand("oracle", "Exact small-grid tables and samples");
  auto* sub_diag = app.add_subcommand("diagnose", "Diagnostics for a previous sample run");
  auto* sub_s4 = app.add_subcommand("reproduce-s4", "Full reproduction pipeline on the built-in 26x26 grid");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sub_qp->parsed()) brmax::cmd_weights_qp(resolve_config(args, false));
    if (sub_lp->parsed()) brmax::cmd_weights_lp(resolve_config(args, false));
    if (sub_sample->parsed()) brmax::cmd_sample(resolve_config(args, false));
    if (sub_oracle->parsed()) brmax::cmd_oracle(resolve_config(args, false));
    if (sub_diag->parsed()) brmax::cmd_diagnose(resolve_config(args, false));
    if (sub_s4->parsed()) brmax::cmd_reproduce_s4(resolve_config(args, true));
  } catch (const brmax::ConfigError& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "%s\n", e.what());
    return 3;
  }
  return 0;
}
