#ifndef BRMAX_COMMANDS_HPP
#define BRMAX_COMMANDS_HPP

#include "brmax/config.hpp"

namespace brmax {

// CLI subcommand bodies. Each validates the config, creates cfg.out_dir,
// writes its artifacts there plus config_used.ini, and throws ConfigError /
// ModelError / NumericError on failure (mapped to exit codes 2 and 3).
void cmd_weights_qp(const RunConfig& cfg);
void cmd_weights_lp(const RunConfig& cfg);
void cmd_sample(const RunConfig& cfg);
void cmd_oracle(const RunConfig& cfg);
void cmd_diagnose(const RunConfig& cfg);
void cmd_reproduce_s4(const RunConfig& cfg);

// Built-in full-scale reproduction setup: 26 x 26 grid on [0, 5]^2 with step
// 0.2, gamma(h) = ||h/5||^{3/2}, corner-average anchor, fixed default seed.
RunConfig section4_config();

}  // namespace brmax

#endif  // BRMAX_COMMANDS_HPP
