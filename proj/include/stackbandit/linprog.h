#pragma once

#include <vector>

#include <Eigen/Dense>

namespace stackbandit {

//   maximize    c^T x
//   subject to  A_ub x <= b_ub
//               A_eq x == b_eq
//               x[i] >= 0 unless free_vars[i]
//
// Any of the constraint blocks may have zero rows. An empty `free_vars`
// means every variable is non-negative.
struct LinearProgram {
  Eigen::VectorXd objective;
  Eigen::MatrixXd a_ub;
  Eigen::VectorXd b_ub;
  Eigen::MatrixXd a_eq;
  Eigen::VectorXd b_eq;
  std::vector<bool> free_vars;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Eigen::VectorXd x;
  double value = 0.0;
};

// Dense two-phase tableau simplex. Pivoting follows Bland's rule (entering
// variable: lowest column index with positive reduced cost; leaving
// variable: minimum ratio, ties to the lowest basic variable index), so the
// returned optimum is a basic solution and is a deterministic function of
// the input. Free variables are split as x = x+ - x-; the pair never enters
// a basis together, so optima are vertices of the original feasible set.
LpResult solve_lp(const LinearProgram& lp);

}  // namespace stackbandit
