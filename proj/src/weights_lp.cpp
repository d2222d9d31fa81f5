#include "brmax/weights_lp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

namespace brmax {

namespace {

constexpr double kLpTol = 1e-9;
constexpr double kPivotTol = 1e-11;
constexpr double kFeasTol = 1e-9;

void check_simplex_vector(const Eigen::VectorXd& v, const char* what) {
  if (v.size() == 0) throw NumericError(std::string(what) + " is empty");
  if (v.minCoeff() < 0.0) throw NumericError(std::string(what) + " has negative entries");
  if (std::abs(v.sum() - 1.0) > 1e-9) throw NumericError(std::string(what) + " must sum to 1");
}

}  // namespace

PartitionSet build_partitions(const GaussianModel& m, double tol) {
  if (!(tol >= 0.0)) throw NumericError("partition tolerance must be >= 0");
  const int N = m.n();
  const Eigen::MatrixXd G = m.variogram_matrix();

  PartitionSet ps;
  ps.tol = tol;
  ps.groups.resize(N);
  std::vector<int> order(N);
  for (int j = 0; j < N; ++j) {
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return G(a, j) < G(b, j) || (G(a, j) == G(b, j) && a < b);
    });
    auto& groups = ps.groups[j];
    for (int r = 0; r < N; ++r) {
      if (r == 0 || G(order[r], j) - G(order[r - 1], j) > tol)
        groups.emplace_back();
      groups.back().push_back(order[r]);
    }
    for (auto& g : groups) std::sort(g.begin(), g.end());
  }
  return ps;
}

double c_lower_bound(const GaussianModel& m, const std::vector<int>& I, int j, double eps,
                     const Eigen::VectorXd& lambda) {
  const int N = m.n();
  if (j < 0 || j >= N) throw NumericError("site index out of range");
  if (I.empty() || static_cast<int>(lambda.size()) != static_cast<int>(I.size()))
    throw NumericError("component set and lambda must have equal positive length");
  for (int i : I)
    if (i < 0 || i >= N) throw NumericError("component index out of range");
  check_simplex_vector(lambda, "lambda");
  if (!(eps >= 0.0) || eps >= 1.0) throw NumericError("epsilon must lie in [0, 1)");

  double a = 0.0;
  for (std::size_t k = 0; k < I.size(); ++k)
    a += lambda[k] * m.variogram(m.grid.point(I[k]) - m.grid.point(j));
  if (eps == 0.0) return a == 0.0 ? 1.0 : 0.0;  // exact limit

  double b = 0.0;
  for (std::size_t k = 0; k < I.size(); ++k)
    for (std::size_t l = k + 1; l < I.size(); ++l)
      b += 2.0 * lambda[k] * lambda[l] * m.variogram(m.grid.point(I[k]) - m.grid.point(I[l]));

  const double om = 1.0 - eps;
  const double lg =
      0.5 * m.rank * std::log(om) - (om / eps) * a + (om * om / (2.0 * eps)) * b;
  return std::exp(lg);
}

CGroupsEvaluator::CGroupsEvaluator(const GaussianModel& m, const PartitionSet& parts,
                                   const Eigen::VectorXd& p) {
  const int N = m.n();
  if (static_cast<int>(parts.groups.size()) != N)
    throw NumericError("partition set does not match the model");
  check_simplex_vector(p, "proposal weights");
  if (p.size() != N) throw NumericError("weight length does not match grid");

  const Eigen::MatrixXd G = m.variogram_matrix();
  half_dim_ = 0.5 * m.rank;
  terms_.resize(N);
  for (int j = 0; j < N; ++j) {
    for (const auto& I : parts.groups[j]) {
      double mass = 0.0;
      for (int i : I) mass += p[i];
      if (mass <= 0.0) continue;
      Term t;
      t.mass = mass;
      t.a = 0.0;
      t.b = 0.0;
      for (std::size_t k = 0; k < I.size(); ++k) {
        const double lk = p[I[k]] / mass;
        t.a += lk * G(I[k], j);
        t.b += lk * lk * G(I[k], I[k]);  // zero, kept for clarity of the double sum
        for (std::size_t l = k + 1; l < I.size(); ++l)
          t.b += 2.0 * lk * (p[I[l]] / mass) * G(I[k], I[l]);
      }
      terms_[j].push_back(t);
    }
  }
}

double CGroupsEvaluator::operator()(double eps) const {
  if (!(eps >= 0.0) || eps >= 1.0) throw NumericError("epsilon must lie in [0, 1)");
  double worst = std::numeric_limits<double>::infinity();
  if (eps == 0.0) {
    for (const auto& row : terms_) {
      double s = 0.0;
      for (const Term& t : row)
        if (t.a == 0.0) s += t.mass;
      worst = std::min(worst, s);
    }
    return worst;
  }
  const double om = 1.0 - eps;
  const double lead = half_dim_ * std::log(om);
  const double ca = om / eps;
  const double cb = om * om / (2.0 * eps);
  for (const auto& row : terms_) {
    double s = 0.0;
    for (const Term& t : row) s += t.mass * std::exp(lead - ca * t.a + cb * t.b);
    worst = std::min(worst, s);
  }
  return worst;
}

double c_groups(const GaussianModel& m, const PartitionSet& parts, const Eigen::VectorXd& p,
                double eps) {
  return CGroupsEvaluator(m, parts, p)(eps);
}

BoundCoefficients bound_cost_matrix(const GaussianModel& m, const PartitionSet& parts,
                                    const Eigen::VectorXd& lambda_source, double eps) {
  const int N = m.n();
  if (static_cast<int>(parts.groups.size()) != N)
    throw NumericError("partition set does not match the model");
  if (lambda_source.size() != N) throw NumericError("lambda source length does not match grid");
  if (!(eps >= 0.0) || eps >= 1.0) throw NumericError("epsilon must lie in [0, 1)");

  const Eigen::MatrixXd G = m.variogram_matrix();
  BoundCoefficients out;
  out.c.resize(N, N);
  out.epsilon = eps;
  out.lambda_source = lambda_source;

  const double om = 1.0 - eps;
  const double lead = eps > 0.0 ? 0.5 * m.rank * std::log(om) : 0.0;
  const double ca = eps > 0.0 ? om / eps : 0.0;
  const double cb = eps > 0.0 ? om * om / (2.0 * eps) : 0.0;

  for (int j = 0; j < N; ++j) {
    for (const auto& I : parts.groups[j]) {
      double mass = 0.0;
      for (int i : I) mass += lambda_source[i];
      std::vector<double> lam(I.size());
      if (mass > 0.0)
        for (std::size_t k = 0; k < I.size(); ++k) lam[k] = lambda_source[I[k]] / mass;
      else
        std::fill(lam.begin(), lam.end(), 1.0 / static_cast<double>(I.size()));

      double a = 0.0, b = 0.0;
      for (std::size_t k = 0; k < I.size(); ++k) {
        a += lam[k] * G(I[k], j);
        for (std::size_t l = k + 1; l < I.size(); ++l)
          b += 2.0 * lam[k] * lam[l] * G(I[k], I[l]);
      }
      const double value = eps > 0.0 ? std::exp(lead - ca * a + cb * b) : (a == 0.0 ? 1.0 : 0.0);
      for (int i : I) out.c(i, j) = value;
    }
  }
  return out;
}

LpResult solve_lp_simplex(const Eigen::MatrixXd& costs) {
  const int N = static_cast<int>(costs.rows());
  if (N < 1 || costs.cols() != N) throw NumericError("cost matrix must be square");

  // Columns: p_0..p_{N-1} | s_0..s_{N-1} | z+ | z- | rhs | rhs offsets.
  // Row-major because every pivot rewrites whole rows.
  const int col_s = N, col_zp = 2 * N, col_zm = 2 * N + 1, col_rhs = 2 * N + 2,
            col_pert = 2 * N + 3;
  Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> T =
      Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>::Zero(N + 1,
                                                                                   2 * N + 4);
  for (int j = 0; j < N; ++j) {
    for (int i = 0; i < N; ++i) T(j, i) = -costs(i, j);
    T(j, col_s + j) = 1.0;
    T(j, col_zp) = 1.0;
    T(j, col_zm) = -1.0;
  }
  T.row(N).head(N).setOnes();
  T(N, col_rhs) = 1.0;

  // Initial basis: the slack of every site row plus the single best vertex
  // of the simplex, which keeps every right-hand side nonnegative.
  int k = 0;
  double best = -std::numeric_limits<double>::infinity();
  for (int i = 0; i < N; ++i) {
    const double worst = costs.row(i).minCoeff();
    if (worst > best) {
      best = worst;
      k = i;
    }
  }
  std::vector<int> basis(N + 1);
  for (int j = 0; j < N; ++j) basis[j] = col_s + j;
  basis[N] = k;
  for (int j = 0; j < N; ++j) T.row(j) -= T(j, k) * T.row(N);

  // Tiny distinct right-hand-side offsets keep every vertex of the walk
  // nondegenerate, so ties in the ratio test cannot trap it in a cycle. They
  // ride along in their own column under the same row operations and are
  // subtracted again on extraction, so the reported solution is that of the
  // unperturbed program.
  for (int j = 0; j < N; ++j) {
    const double u = 1.0 + std::ldexp(static_cast<double>(mix64(j + 1) >> 11), -53);
    T(j, col_pert) = 1e-9 * u;
    T(j, col_rhs) += T(j, col_pert);
  }

  Eigen::VectorXd red = Eigen::VectorXd::Zero(2 * N + 2);
  red[col_zp] = 1.0;
  red[col_zm] = -1.0;

  auto objective = [&](bool exact) {
    double z = 0.0;
    for (int r = 0; r <= N; ++r) {
      const double v = exact ? T(r, col_rhs) - T(r, col_pert) : T(r, col_rhs);
      if (basis[r] == col_zp) z += v;
      if (basis[r] == col_zm) z -= v;
    }
    return z;
  };

  LpResult res;
  double prev_obj = objective(false);
  int stall = 0;
  const long max_pivots = 2000L + 400L * N;

  for (;;) {
    int enter = -1;
    if (!res.bland_activated) {
      double best_rc = kLpTol;
      for (int c = 0; c < 2 * N + 2; ++c)
        if (red[c] > best_rc) {
          best_rc = red[c];
          enter = c;
        }
    } else {
      for (int c = 0; c < 2 * N + 2; ++c)
        if (red[c] > kLpTol) {
          enter = c;
          break;
        }
    }
    if (enter < 0) break;  // optimal

    // Two-pass ratio test: find the tightest step with a small feasibility
    // slack, then among the rows inside that window pivot on the largest
    // element. Trading slack for pivot size keeps the eliminations stable.
    double theta = std::numeric_limits<double>::infinity();
    for (int r = 0; r <= N; ++r) {
      const double a = T(r, enter);
      if (a > kPivotTol) theta = std::min(theta, (std::max(T(r, col_rhs), 0.0) + kFeasTol) / a);
    }
    if (!(theta < std::numeric_limits<double>::infinity()))
      throw NumericError("simplex detected an unbounded direction");

    int leave = -1;
    double best_piv = 0.0;
    for (int r = 0; r <= N; ++r) {
      const double a = T(r, enter);
      if (a > kPivotTol && std::max(T(r, col_rhs), 0.0) / a <= theta &&
          (a > best_piv || (a == best_piv && (leave < 0 || basis[r] < basis[leave])))) {
        best_piv = a;
        leave = r;
      }
    }
    if (leave < 0) throw NumericError("simplex lost its pivot row");

    T.row(leave) /= T(leave, enter);
    for (int r = 0; r <= N; ++r)
      if (r != leave && T(r, enter) != 0.0) T.row(r) -= T(r, enter) * T.row(leave);
    red -= red[enter] * T.row(leave).head(2 * N + 2);
    basis[leave] = enter;
    ++res.iterations;

    const double obj = objective(false);
    if (obj <= prev_obj + 1e-12) {
      if (++stall >= 50) res.bland_activated = true;
    } else {
      stall = 0;
      res.bland_activated = false;
    }
    prev_obj = obj;

    if (res.iterations > max_pivots)
      throw NumericError("simplex exceeded " + std::to_string(max_pivots) + " pivots");
  }

  res.p = Eigen::VectorXd::Zero(N);
  for (int r = 0; r <= N; ++r)
    if (basis[r] < N) res.p[basis[r]] = T(r, col_rhs) - T(r, col_pert);
  res.objective = objective(true);
  res.duals = Eigen::VectorXd(N);
  for (int j = 0; j < N; ++j) res.duals[j] = -red[col_s + j];
  return res;
}

ProposalOptResult optimize_proposal(const GaussianModel& m, const PartitionSet& parts,
                                    double eps0, int max_iter, double tol) {
  if (!(eps0 > 0.0) || eps0 >= 1.0) throw NumericError("eps0 must lie in (0, 1)");
  if (max_iter < 1) throw NumericError("max_iter must be >= 1");

  const int N = m.n();
  const double lo = std::log(1e-6), hi = std::log(1.0 - 1e-6);

  // Coarse log-grid scan to bracket the maximizer, then golden section.
  auto best_eps = [&](const CGroupsEvaluator& f) {
    const int scan = 25;
    int arg = 0;
    double fbest = -1.0;
    for (int s = 0; s < scan; ++s) {
      const double x = lo + (hi - lo) * s / (scan - 1);
      const double v = f(std::exp(x));
      if (v > fbest) {
        fbest = v;
        arg = s;
      }
    }
    double a = lo + (hi - lo) * std::max(0, arg - 1) / (scan - 1);
    double b = lo + (hi - lo) * std::min(scan - 1, arg + 1) / (scan - 1);
    const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = b - gr * (b - a), x2 = a + gr * (b - a);
    double f1 = f(std::exp(x1)), f2 = f(std::exp(x2));
    for (int it = 0; it < 60; ++it) {
      if (f1 < f2) {
        a = x1;
        x1 = x2;
        f1 = f2;
        x2 = a + gr * (b - a);
        f2 = f(std::exp(x2));
      } else {
        b = x2;
        x2 = x1;
        f2 = f1;
        x1 = b - gr * (b - a);
        f1 = f(std::exp(x1));
      }
    }
    const double x = f1 > f2 ? x1 : x2;
    const double fx = std::max(f1, f2);
    return std::pair<double, double>(std::exp(x), fx);
  };

  ProposalOptResult res;
  Eigen::VectorXd p = Eigen::VectorXd::Constant(N, 1.0 / N);
  double eps = eps0;

  double best_val = c_groups(m, parts, p, eps);
  res.p = p;
  res.epsilon = eps;
  res.c_groups_value = best_val;

  for (int iter = 1; iter <= max_iter; ++iter) {
    const BoundCoefficients bc = bound_cost_matrix(m, parts, p, eps);
    const LpResult lp = solve_lp_simplex(bc.c);
    // The solver meets the simplex constraints only to pivot precision;
    // project back so downstream validation sees an exact weight vector.
    p = lp.p.cwiseMax(0.0);
    p /= p.sum();

    const CGroupsEvaluator f(m, parts, p);
    const auto [eps_star, val] = best_eps(f);
    eps = eps_star;

    res.trace.push_back({iter, lp.objective, eps_star, val});

    if (val <= best_val) {
      res.stalled = val < best_val;  // equal value counts as converged
      break;
    }
    const double gain = (val - best_val) / best_val;
    best_val = val;
    res.p = p;
    res.epsilon = eps_star;
    res.c_groups_value = val;
    if (gain < tol) break;
  }
  return res;
}

}  // namespace brmax
