#include "brmax/grid.hpp"

#include <cmath>
#include <string>

namespace brmax {

void Grid::validate() const {
  if (points.rows() < 1) throw ModelError("grid must contain at least one point");
  if (points.cols() < 1) throw ModelError("grid dimension must be at least 1");
  const int N = n();
  for (int i = 0; i < N; ++i)
    for (int j = i + 1; j < N; ++j)
      if ((points.row(i) - points.row(j)).cwiseAbs().maxCoeff() == 0.0)
        throw ModelError("grid points " + std::to_string(i) + " and " + std::to_string(j) +
                         " coincide");
}

Grid Grid::lattice(const std::vector<AxisRange>& axes) {
  if (axes.empty()) throw ModelError("lattice needs at least one axis");
  std::vector<std::vector<double>> ticks;
  ticks.reserve(axes.size());
  for (std::size_t a = 0; a < axes.size(); ++a) {
    const auto& ax = axes[a];
    if (!(ax.step > 0.0)) throw ModelError("axis " + std::to_string(a) + ": step must be > 0");
    if (ax.stop < ax.start) throw ModelError("axis " + std::to_string(a) + ": stop < start");
    std::vector<double> t;
    // Count first so accumulated rounding cannot drop/duplicate the endpoint.
    const long count = static_cast<long>(std::floor((ax.stop - ax.start) / ax.step + 1e-9)) + 1;
    t.reserve(count);
    for (long k = 0; k < count; ++k) t.push_back(ax.start + static_cast<double>(k) * ax.step);
    ticks.push_back(std::move(t));
  }

  long total = 1;
  for (const auto& t : ticks) total *= static_cast<long>(t.size());

  Grid g;
  g.points.resize(total, static_cast<long>(axes.size()));
  std::vector<std::size_t> idx(axes.size(), 0);
  for (long row = 0; row < total; ++row) {
    for (std::size_t a = 0; a < axes.size(); ++a) g.points(row, a) = ticks[a][idx[a]];
    // odometer, last axis fastest
    for (int a = static_cast<int>(axes.size()) - 1; a >= 0; --a) {
      if (++idx[a] < ticks[a].size()) break;
      idx[a] = 0;
    }
  }
  g.validate();
  return g;
}

Variogram::Variogram(double scale_, double exponent_) : scale(scale_), exponent(exponent_) {
  if (!(scale > 0.0)) throw ModelError("variogram scale must be > 0");
  if (!(exponent > 0.0) || exponent > 2.0) throw ModelError("variogram exponent must be in (0, 2]");
}

double eval_variogram(const Variogram& v, const Eigen::VectorXd& h) { return v(h); }

}  // namespace brmax
