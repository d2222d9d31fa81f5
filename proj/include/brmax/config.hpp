#ifndef BRMAX_CONFIG_HPP
#define BRMAX_CONFIG_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "brmax/model.hpp"

namespace brmax {

// One run's worth of settings, read from an INI-style file and overridden by
// CLI flags. parse_config(emit_config(c)) reproduces c exactly.
struct RunConfig {
  // [grid]
  int dim = 2;
  std::vector<Grid::AxisRange> axes{{0.0, 0.2, 5.0}, {0.0, 0.2, 5.0}};

  // [variogram]
  std::string family = "fractional-power";
  double scale = 5.0;
  double alpha = 1.5;

  // [anchor]
  std::string anchor_mode = "corner-average";  // "point" | "corner-average"
  std::vector<double> anchor_point;

  // [sampler]
  std::string variant = "1B";  // 1A | 1B | 2A | 2B
  long n_steps = 100000;
  long n_samples = 10000;
  long burn_in = 1000;

  // [mc]
  long n_sigma = 10000;
  long n_cinf = 10000;
  long n_cdf = 100000;

  // [weights]
  double floor = 0.0;
  double epsilon0 = 0.01;
  int lp_max_iter = 20;
  double lp_tol = 1e-4;
  double partition_tol = 1e-9;

  // [run]
  std::uint64_t seed = 0;
  bool has_seed = false;
  int threads = 0;
  int acf_max_lag = 50;

  // CLI only, not part of the file format
  std::string out_dir = "out";

  bool operator==(const RunConfig& o) const;
};

RunConfig parse_config(const std::string& text);
RunConfig parse_config_file(const std::string& path);
std::string emit_config(const RunConfig& cfg);

// Semantic checks beyond syntax (ranges, cross-field consistency, seed
// presence). Throws ConfigError naming the field.
void validate_config(const RunConfig& cfg);

Grid grid_from_config(const RunConfig& cfg);
GaussianModel model_from_config(const RunConfig& cfg);

}  // namespace brmax

#endif  // BRMAX_CONFIG_HPP
