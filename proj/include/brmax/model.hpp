#ifndef BRMAX_MODEL_HPP
#define BRMAX_MODEL_HPP

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "brmax/grid.hpp"

namespace brmax {

// Gaussian model of the log spectral function on the grid:
//   W ~ N(-sigma/2, C),  C built from the variogram and the anchor weights.
// C is positive semidefinite but usually not definite: a point anchor on
// grid site i* zeroes row and column i* (W_{i*} = 0 surely, i* excluded from
// `active`), and a multi-point anchor pins the matching linear combination
// of W to a constant (the corner-average anchor always does). The active
// block is therefore factored as C_act = F F^T with a rank-revealing pivoted
// Cholesky; `rank` is the dimension the law actually lives on and is the
// exponent count in every (1 - eps)^{./2} density factor.
struct GaussianModel {
  Grid grid;
  Variogram variogram;
  AnchorSpec anchor;

  Eigen::MatrixXd C;           // N x N covariance
  Eigen::VectorXd sigma;       // diag(C)
  Eigen::MatrixXd chol;        // N x rank factor F, zero row at the degenerate index
  Eigen::MatrixXd chol_red;    // active-block rows of F (N_act x rank)
  std::vector<int> chol_perm;  // pivot order; rows chol_perm[0..rank) of chol_red
                               // form a lower-triangular nonsingular factor
  int rank = 0;
  std::vector<int> active;     // indices with positive variance, ascending
  std::optional<int> degenerate_index;

  int n() const { return static_cast<int>(grid.points.rows()); }
  int effective_dim() const { return static_cast<int>(active.size()); }

  // (w + sigma/2)^T C^+ (w + sigma/2), the pseudo-inverse quadratic form.
  // Exact for arguments in the range of C, which holds a.s. for samples.
  double quad_form(const Eigen::VectorXd& w) const;

  // Gamma_ij = gamma(t_i - t_j).
  Eigen::MatrixXd variogram_matrix() const;
};

// Assembles C from the anchored-increment covariance
//   C_ij = a_i + a_j - b - gamma(t_i - t_j),
//   a_i  = sum_k w_k gamma(t_i - c_k),  b = sum_kl w_k w_l gamma(c_k - c_l),
// where (w_k, c_k) are the anchor weights, and factorizes it.
// Throws ModelError if the grid is invalid, the corner-average anchor is
// requested off a rectangular 2-d grid, or the covariance is indefinite
// beyond a 1e-10 relative pivot tolerance.
GaussianModel build_model(const Grid& grid, const Variogram& variogram, const AnchorSpec& anchor);

// Lower Cholesky factor with pivot checking. On failure returns the index
// and value of the offending pivot instead of a factor.
struct CholeskyResult {
  bool ok = false;
  Eigen::MatrixXd L;
  int pivot_index = -1;
  double pivot_value = 0.0;
};
CholeskyResult cholesky_lower(const Eigen::MatrixXd& A, double rel_tol = 1e-10);

// Rank-revealing Cholesky with complete (diagonal) pivoting: A = F F^T with
// F n x rank, rows perm[0..rank) of F lower triangular in pivot order.
// Stops when the largest remaining diagonal drops below rel_tol times the
// largest initial diagonal; fails only if a remaining diagonal is negative
// beyond that tolerance (A indefinite).
struct PsdCholeskyResult {
  bool ok = false;
  Eigen::MatrixXd F;
  std::vector<int> perm;
  int rank = 0;
  int pivot_index = -1;
  double pivot_value = 0.0;
};
PsdCholeskyResult cholesky_psd(const Eigen::MatrixXd& A, double rel_tol = 1e-10);

}  // namespace brmax

#endif  // BRMAX_MODEL_HPP
