#include "brmax/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace brmax {

namespace {

struct AnchorWeights {
  std::vector<double> w;
  std::vector<Eigen::VectorXd> c;
};

// Finds the four bounding-box corners of a 2-d grid and checks they are
// grid members. The corner-average anchor is only defined on such grids.
AnchorWeights corner_average_weights(const Grid& grid) {
  if (grid.dim() != 2)
    throw ModelError("corner-average anchor requires a 2-d rectangular grid");
  const Eigen::VectorXd lo = grid.points.colwise().minCoeff();
  const Eigen::VectorXd hi = grid.points.colwise().maxCoeff();
  const double span = std::max(1.0, (hi - lo).norm());
  AnchorWeights aw;
  for (int cx = 0; cx < 2; ++cx)
    for (int cy = 0; cy < 2; ++cy) {
      Eigen::VectorXd corner(2);
      corner << (cx == 0 ? lo[0] : hi[0]), (cy == 0 ? lo[1] : hi[1]);
      bool found = false;
      for (int i = 0; i < grid.n() && !found; ++i)
        if ((grid.point(i) - corner).norm() <= 1e-12 * span) {
          aw.c.push_back(grid.point(i));  // snap to the stored site
          found = true;
        }
      if (!found)
        throw ModelError("corner-average anchor: grid has no point at corner (" +
                         std::to_string(corner[0]) + ", " + std::to_string(corner[1]) + ")");
      aw.w.push_back(0.25);
    }
  return aw;
}

AnchorWeights anchor_weights(const Grid& grid, const AnchorSpec& anchor) {
  if (anchor.mode == AnchorSpec::Mode::CornerAverage) return corner_average_weights(grid);
  if (anchor.point.size() != grid.dim())
    throw ModelError("anchor point dimension does not match the grid");
  AnchorWeights aw;
  aw.w.push_back(1.0);
  aw.c.push_back(anchor.point);
  return aw;
}

}  // namespace

CholeskyResult cholesky_lower(const Eigen::MatrixXd& A, double rel_tol) {
  const int n = static_cast<int>(A.rows());
  CholeskyResult res;
  // Row-major so the inner dot products run over contiguous memory.
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> L =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(n, n);
  const double scale = n > 0 ? std::max(A.diagonal().maxCoeff(), 0.0) : 0.0;
  const double tol = rel_tol * std::max(scale, std::numeric_limits<double>::min());
  for (int k = 0; k < n; ++k) {
    double d = A(k, k);
    if (k > 0) d -= L.row(k).head(k).squaredNorm();
    if (!(d > tol)) {
      res.ok = false;
      res.pivot_index = k;
      res.pivot_value = d;
      return res;
    }
    const double lkk = std::sqrt(d);
    L(k, k) = lkk;
    for (int i = k + 1; i < n; ++i) {
      double s = A(i, k);
      if (k > 0) s -= L.row(i).head(k).dot(L.row(k).head(k));
      L(i, k) = s / lkk;
    }
  }
  res.ok = true;
  res.L = L;
  return res;
}

PsdCholeskyResult cholesky_psd(const Eigen::MatrixXd& A, double rel_tol) {
  const int n = static_cast<int>(A.rows());
  PsdCholeskyResult res;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> F =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(n, n);
  Eigen::VectorXd d = A.diagonal();
  res.perm.resize(n);
  for (int i = 0; i < n; ++i) res.perm[i] = i;
  const double scale = n > 0 ? std::max(d.maxCoeff(), 0.0) : 0.0;
  const double tol = rel_tol * std::max(scale, std::numeric_limits<double>::min());

  int k = 0;
  for (; k < n; ++k) {
    int best = k;
    for (int t = k + 1; t < n; ++t)
      if (d[res.perm[t]] > d[res.perm[best]]) best = t;
    std::swap(res.perm[k], res.perm[best]);
    const int i = res.perm[k];
    if (d[i] <= tol) {
      if (d[i] < -tol) {
        res.ok = false;
        res.pivot_index = k;
        res.pivot_value = d[i];
        return res;
      }
      break;
    }
    const double lkk = std::sqrt(d[i]);
    F(i, k) = lkk;
    for (int t = k + 1; t < n; ++t) {
      const int j = res.perm[t];
      const double s = A(j, i) - F.row(j).head(k).dot(F.row(i).head(k));
      F(j, k) = s / lkk;
      d[j] -= F(j, k) * F(j, k);
    }
  }
  res.ok = true;
  res.rank = k;
  res.F = F.leftCols(k);
  return res;
}

double GaussianModel::quad_form(const Eigen::VectorXd& w) const {
  // Forward solve on the pivoted triangular part: with q restricted to the
  // active block and q in range(C), q^T C^+ q = |y|^2 where L y = (P^T q)_r.
  Eigen::VectorXd y(rank);
  for (int k = 0; k < rank; ++k) {
    const int row = chol_perm[k];
    const int i = active[row];
    double s = w[i] + 0.5 * sigma[i];
    for (int c = 0; c < k; ++c) s -= chol_red(row, c) * y[c];
    y[k] = s / chol_red(row, k);
  }
  return y.squaredNorm();
}

Eigen::MatrixXd GaussianModel::variogram_matrix() const {
  const int N = n();
  Eigen::MatrixXd G(N, N);
  for (int i = 0; i < N; ++i) {
    G(i, i) = 0.0;
    for (int j = i + 1; j < N; ++j) {
      const double g = variogram(grid.point(i) - grid.point(j));
      G(i, j) = g;
      G(j, i) = g;
    }
  }
  return G;
}

GaussianModel build_model(const Grid& grid, const Variogram& variogram, const AnchorSpec& anchor) {
  grid.validate();
  if (!(variogram.scale > 0.0) || !(variogram.exponent > 0.0) || variogram.exponent > 2.0)
    throw ModelError("invalid variogram parameters");

  GaussianModel m;
  m.grid = grid;
  m.variogram = variogram;
  m.anchor = anchor;

  const int N = grid.n();
  const AnchorWeights aw = anchor_weights(grid, anchor);

  Eigen::VectorXd a = Eigen::VectorXd::Zero(N);
  for (int i = 0; i < N; ++i)
    for (std::size_t k = 0; k < aw.w.size(); ++k)
      a[i] += aw.w[k] * variogram(grid.point(i) - aw.c[k]);

  double b = 0.0;
  for (std::size_t k = 0; k < aw.w.size(); ++k)
    for (std::size_t l = 0; l < aw.w.size(); ++l)
      b += aw.w[k] * aw.w[l] * variogram(aw.c[k] - aw.c[l]);

  m.C.resize(N, N);
  for (int i = 0; i < N; ++i) {
    m.C(i, i) = 2.0 * a[i] - b;
    for (int j = i + 1; j < N; ++j) {
      const double cij = a[i] + a[j] - b - variogram(grid.point(i) - grid.point(j));
      m.C(i, j) = cij;
      m.C(j, i) = cij;
    }
  }

  // A point anchor sitting on a grid site pins that coordinate of W to 0.
  if (anchor.mode == AnchorSpec::Mode::Point) {
    const double span = std::max(1.0, anchor.point.norm());
    for (int i = 0; i < N; ++i)
      if ((grid.point(i) - anchor.point).norm() <= 1e-12 * span) {
        m.degenerate_index = i;
        m.C.row(i).setZero();
        m.C.col(i).setZero();
        break;
      }
  }

  m.sigma = m.C.diagonal();
  for (int i = 0; i < N; ++i) m.active.push_back(i);
  if (m.degenerate_index)
    m.active.erase(m.active.begin() + *m.degenerate_index);

  const int ne = static_cast<int>(m.active.size());
  Eigen::MatrixXd Cred(ne, ne);
  for (int p = 0; p < ne; ++p)
    for (int q = 0; q < ne; ++q) Cred(p, q) = m.C(m.active[p], m.active[q]);

  PsdCholeskyResult chol = cholesky_psd(Cred);
  if (!chol.ok) {
    std::ostringstream os;
    os << "covariance is not positive semidefinite within tolerance: pivot " << chol.pivot_index
       << " of the reduced matrix is " << chol.pivot_value;
    throw ModelError(os.str());
  }
  m.chol_red = chol.F;
  m.chol_perm = chol.perm;
  m.rank = chol.rank;

  m.chol = Eigen::MatrixXd::Zero(N, m.rank);
  for (int p = 0; p < ne; ++p) m.chol.row(m.active[p]) = m.chol_red.row(p);

  return m;
}

}  // namespace brmax
