#ifndef BRMAX_WEIGHTS_LP_HPP
#define BRMAX_WEIGHTS_LP_HPP

#include <Eigen/Dense>
#include <vector>

#include "brmax/model.hpp"

namespace brmax {

// For each site j, the grid indices grouped by their variogram distance to
// t_j (equal within tol). groups[j] is a partition of {0, ..., N-1}.
struct PartitionSet {
  std::vector<std::vector<std::vector<int>>> groups;
  double tol = 1e-9;
};
PartitionSet build_partitions(const GaussianModel& m, double tol = 1e-9);

// Closed-form lower-bound factor for acceptance at site j when proposing
// from components I with within-group weights lambda (on the simplex):
//   c_I^(j) = (1-eps)^{rank/2} exp( -((1-eps)/eps) sum_k lambda_k g_kj
//                                    + ((1-eps)^2/(2 eps)) sum_kl lambda_k lambda_l g_kl )
// with g = variogram distances. At eps = 0 the limit is returned exactly:
// 1 if every g_kj vanishes, else 0.
double c_lower_bound(const GaussianModel& m, const std::vector<int>& I, int j, double eps,
                     const Eigen::VectorXd& lambda);

// Overall bound constant: min over j of the per-group sums
// sum_{I in groups[j]} ||p_I||_1 c_I^(j)(eps, p_I / ||p_I||_1).
// Groups with zero mass contribute zero.
double c_groups(const GaussianModel& m, const PartitionSet& parts, const Eigen::VectorXd& p,
                double eps);

// Caches the per-(j, group) mass and variogram sums for a fixed p so that
// sweeping eps costs O(total number of groups) per evaluation.
class CGroupsEvaluator {
 public:
  CGroupsEvaluator(const GaussianModel& m, const PartitionSet& parts, const Eigen::VectorXd& p);
  double operator()(double eps) const;

 private:
  struct Term {
    double mass;  // ||p_I||_1
    double a;     // sum_k lambda_k g_kj
    double b;     // sum_kl lambda_k lambda_l g_kl
  };
  std::vector<std::vector<Term>> terms_;  // per j
  double half_dim_;
};

// Bound coefficient matrix c_ij = c_{I(i,j)}^{(j)}(eps, lambda) where I(i, j)
// is the group of i in groups[j] and lambda is taken from lambda_source
// renormalized within each group (uniform within zero-mass groups).
struct BoundCoefficients {
  Eigen::MatrixXd c;  // N x N, c(i, j)
  double epsilon = 0.0;
  Eigen::VectorXd lambda_source;
};
BoundCoefficients bound_cost_matrix(const GaussianModel& m, const PartitionSet& parts,
                                    const Eigen::VectorXd& lambda_source, double eps);

// max_p min_j sum_i c_ij p_i over the probability simplex, by a dense primal
// simplex on the standard form with per-constraint slacks and a split free
// objective variable. Degeneracy is broken by tiny tracked right-hand-side
// offsets (subtracted again on extraction), pivots are chosen by Dantzig
// pricing with a two-pass largest-element ratio test, and Bland's rule takes
// over while the objective stalls.
struct LpResult {
  Eigen::VectorXd p;
  double objective = 0.0;
  int iterations = 0;
  bool bland_activated = false;
  Eigen::VectorXd duals;  // one per site constraint, sums to 1 at optimum
};
LpResult solve_lp_simplex(const Eigen::MatrixXd& costs);

// Alternating optimization of (p, eps): fix within-group lambda from the
// current p, rebuild the cost matrix and solve the LP for p, then line-search
// eps by golden section on log eps. Keeps the best iterate seen; stops on
// relative gain < tol, on max_iter, or (flagged) on a non-increasing step.
struct ProposalOptResult {
  Eigen::VectorXd p;
  double epsilon = 0.0;
  double c_groups_value = 0.0;
  bool stalled = false;
  struct IterRecord {
    int iter;
    double lp_objective;
    double epsilon;
    double c_groups_value;
  };
  std::vector<IterRecord> trace;
};
ProposalOptResult optimize_proposal(const GaussianModel& m, const PartitionSet& parts,
                                    double eps0 = 0.01, int max_iter = 20, double tol = 1e-4);

}  // namespace brmax

#endif  // BRMAX_WEIGHTS_LP_HPP
