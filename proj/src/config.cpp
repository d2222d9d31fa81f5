#include "brmax/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "brmax/csv.hpp"

namespace brmax {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

double parse_double(const std::string& value, int line, const std::string& field) {
  char* end = nullptr;
  const double x = std::strtod(value.c_str(), &end);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("expected a number, got '" + value + "'", line, field);
  return x;
}

long parse_long(const std::string& value, int line, const std::string& field) {
  char* end = nullptr;
  const long long x = std::strtoll(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0')
    throw ConfigError("expected an integer, got '" + value + "'", line, field);
  return static_cast<long>(x);
}

std::uint64_t parse_u64(const std::string& value, int line, const std::string& field) {
  char* end = nullptr;
  const unsigned long long x = std::strtoull(value.c_str(), &end, 10);
  if (end == value.c_str() || *end != '\0' || value.find('-') != std::string::npos)
    throw ConfigError("expected an unsigned integer, got '" + value + "'", line, field);
  return static_cast<std::uint64_t>(x);
}

Grid::AxisRange parse_axis(const std::string& value, int line, const std::string& field) {
  const std::size_t c1 = value.find(':');
  const std::size_t c2 = c1 == std::string::npos ? std::string::npos : value.find(':', c1 + 1);
  if (c1 == std::string::npos || c2 == std::string::npos)
    throw ConfigError("expected start:step:stop, got '" + value + "'", line, field);
  Grid::AxisRange ax;
  ax.start = parse_double(trim(value.substr(0, c1)), line, field);
  ax.step = parse_double(trim(value.substr(c1 + 1, c2 - c1 - 1)), line, field);
  ax.stop = parse_double(trim(value.substr(c2 + 1)), line, field);
  return ax;
}

std::vector<double> parse_point(const std::string& value, int line, const std::string& field) {
  std::istringstream in(value);
  std::vector<double> coords;
  std::string tok;
  while (in >> tok) coords.push_back(parse_double(tok, line, field));
  if (coords.empty()) throw ConfigError("expected coordinates", line, field);
  return coords;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  RunConfig cfg;
  cfg.axes.clear();

  std::istringstream in(text);
  std::string line;
  std::string section;
  int lineno = 0;
  std::set<std::string> seen;
  std::vector<std::pair<int, Grid::AxisRange>> axes;  // axis index -> range

  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;

    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("unterminated section header", lineno);
      section = t.substr(1, t.size() - 2);
      static const std::set<std::string> known{"grid",    "variogram", "anchor", "sampler",
                                              "mc",      "weights",   "run"};
      if (!known.count(section)) throw ConfigError("unknown section [" + section + "]", lineno);
      continue;
    }

    const std::size_t eq = t.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value", lineno);
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (section.empty()) throw ConfigError("key outside of any section", lineno, key);
    const std::string field = section + "." + key;
    if (!seen.insert(field).second) throw ConfigError("duplicate key", lineno, field);

    if (section == "grid") {
      if (key == "dim") {
        cfg.dim = static_cast<int>(parse_long(value, lineno, field));
      } else if (key.rfind("axis", 0) == 0) {
        char* end = nullptr;
        const long idx = std::strtol(key.c_str() + 4, &end, 10);
        if (end == key.c_str() + 4 || *end != '\0' || idx < 0)
          throw ConfigError("unknown key", lineno, field);
        axes.emplace_back(static_cast<int>(idx), parse_axis(value, lineno, field));
      } else {
        throw ConfigError("unknown key", lineno, field);
      }
    } else if (section == "variogram") {
      if (key == "family")
        cfg.family = value;
      else if (key == "scale")
        cfg.scale = parse_double(value, lineno, field);
      else if (key == "alpha")
        cfg.alpha = parse_double(value, lineno, field);
      else
        throw ConfigError("unknown key", lineno, field);
    } else if (section == "anchor") {
      if (key == "mode")
        cfg.anchor_mode = value;
      else if (key == "point")
        cfg.anchor_point = parse_point(value, lineno, field);
      else
        throw ConfigError("unknown key", lineno, field);
    } else if (section == "sampler") {
      if (key == "variant")
        cfg.variant = value;
      else if (key == "n_steps")
        cfg.n_steps = parse_long(value, lineno, field);
      else if (key == "n_samples")
        cfg.n_samples = parse_long(value, lineno, field);
      else if (key == "burn_in")
        cfg.burn_in = parse_long(value, lineno, field);
      else
        throw ConfigError("unknown key", lineno, field);
    } else if (section == "mc") {
      if (key == "n_sigma")
        cfg.n_sigma = parse_long(value, lineno, field);
      else if (key == "n_cinf")
        cfg.n_cinf = parse_long(value, lineno, field);
      else if (key == "n_cdf")
        cfg.n_cdf = parse_long(value, lineno, field);
      else
        throw ConfigError("unknown key", lineno, field);
    } else if (section == "weights") {
      if (key == "floor")
        cfg.floor = parse_double(value, lineno, field);
      else if (key == "epsilon0")
        cfg.epsilon0 = parse_double(value, lineno, field);
      else if (key == "lp_max_iter")
        cfg.lp_max_iter = static_cast<int>(parse_long(value, lineno, field));
      else if (key == "lp_tol")
        cfg.lp_tol = parse_double(value, lineno, field);
      else if (key == "partition_tol")
        cfg.partition_tol = parse_double(value, lineno, field);
      else
        throw ConfigError("unknown key", lineno, field);
    } else if (section == "run") {
      if (key == "seed") {
        cfg.seed = parse_u64(value, lineno, field);
        cfg.has_seed = true;
      } else if (key == "threads") {
        cfg.threads = static_cast<int>(parse_long(value, lineno, field));
      } else if (key == "acf_max_lag") {
        cfg.acf_max_lag = static_cast<int>(parse_long(value, lineno, field));
      } else {
        throw ConfigError("unknown key", lineno, field);
      }
    }
  }

  std::sort(axes.begin(), axes.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t k = 0; k < axes.size(); ++k) {
    if (axes[k].first != static_cast<int>(k))
      throw ConfigError("axes must be numbered axis0..axis" + std::to_string(axes.size() - 1), 0,
                        "grid.axis" + std::to_string(axes[k].first));
    cfg.axes.push_back(axes[k].second);
  }
  return cfg;
}

RunConfig parse_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string emit_config(const RunConfig& cfg) {
  std::ostringstream out;
  out << "[grid]\n";
  out << "dim = " << cfg.dim << "\n";
  for (std::size_t k = 0; k < cfg.axes.size(); ++k)
    out << "axis" << k << " = " << format_double(cfg.axes[k].start) << ":"
        << format_double(cfg.axes[k].step) << ":" << format_double(cfg.axes[k].stop) << "\n";
  out << "\n[variogram]\n";
  out << "family = " << cfg.family << "\n";
  out << "scale = " << format_double(cfg.scale) << "\n";
  out << "alpha = " << format_double(cfg.alpha) << "\n";
  out << "\n[anchor]\n";
  out << "mode = " << cfg.anchor_mode << "\n";
  if (!cfg.anchor_point.empty()) {
    out << "point =";
    for (double x : cfg.anchor_point) out << " " << format_double(x);
    out << "\n";
  }
  out << "\n[sampler]\n";
  out << "variant = " << cfg.variant << "\n";
  out << "n_steps = " << cfg.n_steps << "\n";
  out << "n_samples = " << cfg.n_samples << "\n";
  out << "burn_in = " << cfg.burn_in << "\n";
  out << "\n[mc]\n";
  out << "n_sigma = " << cfg.n_sigma << "\n";
  out << "n_cinf = " << cfg.n_cinf << "\n";
  out << "n_cdf = " << cfg.n_cdf << "\n";
  out << "\n[weights]\n";
  out << "floor = " << format_double(cfg.floor) << "\n";
  out << "epsilon0 = " << format_double(cfg.epsilon0) << "\n";
  out << "lp_max_iter = " << cfg.lp_max_iter << "\n";
  out << "lp_tol = " << format_double(cfg.lp_tol) << "\n";
  out << "partition_tol = " << format_double(cfg.partition_tol) << "\n";
  out << "\n[run]\n";
  if (cfg.has_seed) out << "seed = " << cfg.seed << "\n";
  out << "threads = " << cfg.threads << "\n";
  out << "acf_max_lag = " << cfg.acf_max_lag << "\n";
  return out.str();
}

bool RunConfig::operator==(const RunConfig& o) const {
  auto axis_eq = [](const Grid::AxisRange& a, const Grid::AxisRange& b) {
    return a.start == b.start && a.step == b.step && a.stop == b.stop;
  };
  if (axes.size() != o.axes.size()) return false;
  for (std::size_t k = 0; k < axes.size(); ++k)
    if (!axis_eq(axes[k], o.axes[k])) return false;
  return dim == o.dim && family == o.family && scale == o.scale && alpha == o.alpha &&
         anchor_mode == o.anchor_mode && anchor_point == o.anchor_point && variant == o.variant &&
         n_steps == o.n_steps && n_samples == o.n_samples && burn_in == o.burn_in &&
         n_sigma == o.n_sigma && n_cinf == o.n_cinf && n_cdf == o.n_cdf && floor == o.floor &&
         epsilon0 == o.epsilon0 && lp_max_iter == o.lp_max_iter && lp_tol == o.lp_tol &&
         partition_tol == o.partition_tol && seed == o.seed && has_seed == o.has_seed &&
         threads == o.threads && acf_max_lag == o.acf_max_lag;
}

void validate_config(const RunConfig& cfg) {
  if (cfg.dim < 1) throw ConfigError("dim must be >= 1", 0, "grid.dim");
  if (static_cast<int>(cfg.axes.size()) != cfg.dim)
    throw ConfigError("expected " + std::to_string(cfg.dim) + " axes, got " +
                          std::to_string(cfg.axes.size()),
                      0, "grid.dim");
  for (std::size_t k = 0; k < cfg.axes.size(); ++k) {
    const auto& ax = cfg.axes[k];
    const std::string field = "grid.axis" + std::to_string(k);
    if (!(ax.step > 0.0)) throw ConfigError("step must be > 0", 0, field);
    if (ax.stop < ax.start) throw ConfigError("stop must be >= start", 0, field);
  }
  if (cfg.family != "fractional-power")
    throw ConfigError("unknown variogram family '" + cfg.family + "'", 0, "variogram.family");
  if (!(cfg.scale > 0.0)) throw ConfigError("scale must be > 0", 0, "variogram.scale");
  if (!(cfg.alpha > 0.0) || cfg.alpha > 2.0)
    throw ConfigError("alpha must lie in (0, 2]", 0, "variogram.alpha");
  if (cfg.anchor_mode != "point" && cfg.anchor_mode != "corner-average")
    throw ConfigError("mode must be 'point' or 'corner-average'", 0, "anchor.mode");
  if (cfg.anchor_mode == "point" &&
      static_cast<int>(cfg.anchor_point.size()) != cfg.dim)
    throw ConfigError("anchor point needs " + std::to_string(cfg.dim) + " coordinates", 0,
                      "anchor.point");
  if (cfg.variant != "1A" && cfg.variant != "1B" && cfg.variant != "2A" && cfg.variant != "2B")
    throw ConfigError("variant must be one of 1A, 1B, 2A, 2B", 0, "sampler.variant");
  if (cfg.n_steps < 1) throw ConfigError("n_steps must be >= 1", 0, "sampler.n_steps");
  if (cfg.n_samples < 1) throw ConfigError("n_samples must be >= 1", 0, "sampler.n_samples");
  if (cfg.burn_in < 0) throw ConfigError("burn_in must be >= 0", 0, "sampler.burn_in");
  if (cfg.n_sigma < 2) throw ConfigError("n_sigma must be >= 2", 0, "mc.n_sigma");
  if (cfg.n_cinf < 2) throw ConfigError("n_cinf must be >= 2", 0, "mc.n_cinf");
  if (cfg.n_cdf < 2) throw ConfigError("n_cdf must be >= 2", 0, "mc.n_cdf");
  if (cfg.floor < 0.0) throw ConfigError("floor must be >= 0", 0, "weights.floor");
  if (!(cfg.epsilon0 > 0.0) || cfg.epsilon0 >= 1.0)
    throw ConfigError("epsilon0 must lie in (0, 1)", 0, "weights.epsilon0");
  if (cfg.lp_max_iter < 1) throw ConfigError("lp_max_iter must be >= 1", 0, "weights.lp_max_iter");
  if (!(cfg.lp_tol > 0.0)) throw ConfigError("lp_tol must be > 0", 0, "weights.lp_tol");
  if (cfg.partition_tol < 0.0)
    throw ConfigError("partition_tol must be >= 0", 0, "weights.partition_tol");
  if (!cfg.has_seed)
    throw ConfigError("a seed is required: pass --seed or set seed under [run]", 0, "run.seed");
  if (cfg.threads < 0) throw ConfigError("threads must be >= 0", 0, "run.threads");
  if (cfg.acf_max_lag < 1) throw ConfigError("acf_max_lag must be >= 1", 0, "run.acf_max_lag");
}

Grid grid_from_config(const RunConfig& cfg) { return Grid::lattice(cfg.axes); }

GaussianModel model_from_config(const RunConfig& cfg) {
  const Grid grid = grid_from_config(cfg);
  const Variogram vario(cfg.scale, cfg.alpha);
  AnchorSpec anchor;
  if (cfg.anchor_mode == "point") {
    Eigen::VectorXd p(cfg.anchor_point.size());
    for (std::size_t k = 0; k < cfg.anchor_point.size(); ++k) p[k] = cfg.anchor_point[k];
    anchor = AnchorSpec::at_point(p);
  } else {
    anchor = AnchorSpec::corner_average();
  }
  return build_model(grid, vario, anchor);
}

}  // namespace brmax
