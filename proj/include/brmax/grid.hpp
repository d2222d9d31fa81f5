#ifndef BRMAX_GRID_HPP
#define BRMAX_GRID_HPP

#include <Eigen/Dense>
#include <array>
#include <vector>

#include "brmax/common.hpp"

namespace brmax {

// Finite set of observation sites. Row i of `points` is t_i. Lattice grids
// are ordered lexicographically with axis 0 outermost (last axis fastest).
struct Grid {
  Eigen::MatrixXd points;  // N x d

  int n() const { return static_cast<int>(points.rows()); }
  int dim() const { return static_cast<int>(points.cols()); }
  Eigen::VectorXd point(int i) const { return points.row(i).transpose(); }

  // Throws ModelError if empty or if two sites coincide.
  void validate() const;

  // Inclusive axis ranges start:step:stop. A stop that is not an exact
  // multiple of step away from start is truncated to the last point inside.
  struct AxisRange {
    double start;
    double step;
    double stop;
  };
  static Grid lattice(const std::vector<AxisRange>& axes);
};

enum class VariogramFamily { FractionalPower };

// Fractional-power variogram gamma(h) = ||h / scale||^exponent.
// scale > 0, exponent in (0, 2]. The family tag is an extension point.
struct Variogram {
  VariogramFamily family = VariogramFamily::FractionalPower;
  double scale = 1.0;
  double exponent = 1.0;

  Variogram() = default;
  Variogram(double scale_, double exponent_);

  double operator()(const Eigen::VectorXd& h) const {
    return std::pow(h.norm() / scale, exponent);
  }
};

double eval_variogram(const Variogram& v, const Eigen::VectorXd& h);

// Where the increment process is pinned to zero variance. Either a single
// point t* (which may or may not belong to the grid) or the average of the
// four corners of a rectangular 2-d grid.
struct AnchorSpec {
  enum class Mode { Point, CornerAverage };

  Mode mode = Mode::CornerAverage;
  Eigen::VectorXd point;  // used when mode == Point

  static AnchorSpec at_point(Eigen::VectorXd p) {
    AnchorSpec a;
    a.mode = Mode::Point;
    a.point = std::move(p);
    return a;
  }
  static AnchorSpec corner_average() { return AnchorSpec{}; }
};

}  // namespace brmax

#endif  // BRMAX_GRID_HPP
