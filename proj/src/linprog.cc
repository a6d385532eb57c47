#include "stackbandit/linprog.h"

#include <stdexcept>

namespace stackbandit {
namespace {

constexpr double kReducedCostEps = 1e-10;
constexpr double kPivotEps = 1e-11;
constexpr double kFeasibilityEps = 1e-9;
constexpr int kMaxPivots = 100000;

struct Tableau {
  Eigen::MatrixXd rows;  // m x (ncols + 1); last column is the right-hand side
  Eigen::RowVectorXd obj;  // reduced costs; last entry is minus the objective value
  std::vector<int> basis;
  int ncols = 0;

  double& rhs(int i) { return rows(i, ncols); }

  void pivot(int p, int q) {
    rows.row(p) /= rows(p, q);
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      if (i != p && rows(i, q) != 0.0) rows.row(i) -= rows(i, q) * rows.row(p);
    }
    if (obj[q] != 0.0) obj -= obj[q] * rows.row(p);
    basis[p] = q;
  }

  void set_objective(const Eigen::VectorXd& cost) {
    obj.setZero(ncols + 1);
    obj.head(ncols) = cost.transpose();
    for (Eigen::Index i = 0; i < rows.rows(); ++i) {
      const double cb = cost[basis[i]];
      if (cb != 0.0) obj -= cb * rows.row(i);
    }
  }

  // Maximizes over columns [0, usable). Returns false when unbounded.
  bool optimize(int usable) {
    for (int iter = 0; iter < kMaxPivots; ++iter) {
      int q = -1;
      for (int j = 0; j < usable; ++j) {
        if (obj[j] > kReducedCostEps) {
          q = j;
          break;
        }
      }
      if (q < 0) return true;
      int p = -1;
      double best_ratio = 0.0;
      for (Eigen::Index i = 0; i < rows.rows(); ++i) {
        const double a = rows(i, q);
        if (a <= kPivotEps) continue;
        const double ratio = rows(i, ncols) / a;
        if (p < 0 || ratio < best_ratio - 1e-12 ||
            (ratio <= best_ratio + 1e-12 && basis[i] < basis[p])) {
          p = static_cast<int>(i);
          best_ratio = ratio;
        }
      }
      if (p < 0) return false;
      pivot(p, q);
    }
    throw std::runtime_error("solve_lp: pivot limit exceeded");
  }
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp) {
  const int n = static_cast<int>(lp.objective.size());
  const int m_ub = static_cast<int>(lp.a_ub.rows());
  const int m_eq = static_cast<int>(lp.a_eq.rows());
  if (m_ub > 0 && (lp.a_ub.cols() != n || lp.b_ub.size() != m_ub)) {
    throw std::invalid_argument("solve_lp: inequality block has inconsistent shape");
  }
  if (m_eq > 0 && (lp.a_eq.cols() != n || lp.b_eq.size() != m_eq)) {
    throw std::invalid_argument("solve_lp: equality block has inconsistent shape");
  }
  if (!lp.free_vars.empty() && static_cast<int>(lp.free_vars.size()) != n) {
    throw std::invalid_argument("solve_lp: free_vars has wrong length");
  }

  // Structural columns: x+ for every variable, then x- for free ones.
  std::vector<int> neg_col(n, -1);
  int structural = n;
  for (int i = 0; i < n; ++i) {
    if (!lp.free_vars.empty() && lp.free_vars[i]) neg_col[i] = structural++;
  }
  const int m = m_ub + m_eq;
  const int slack_begin = structural;
  const int art_begin = slack_begin + m_ub;

  // Decide which rows need an artificial variable.
  std::vector<int> art_col(m, -1);
  int ncols = art_begin;
  for (int r = 0; r < m; ++r) {
    const bool ub = r < m_ub;
    const double b = ub ? lp.b_ub[r] : lp.b_eq[r - m_ub];
    if (!ub || b < 0.0) art_col[r] = ncols++;
  }

  Tableau t;
  t.ncols = ncols;
  t.rows.setZero(m, ncols + 1);
  t.basis.assign(m, -1);
  for (int r = 0; r < m; ++r) {
    const bool ub = r < m_ub;
    const double b = ub ? lp.b_ub[r] : lp.b_eq[r - m_ub];
    const double sign = b < 0.0 ? -1.0 : 1.0;
    for (int i = 0; i < n; ++i) {
      const double a = ub ? lp.a_ub(r, i) : lp.a_eq(r - m_ub, i);
      t.rows(r, i) = sign * a;
      if (neg_col[i] >= 0) t.rows(r, neg_col[i]) = -sign * a;
    }
    if (ub) t.rows(r, slack_begin + r) = sign;
    t.rows(r, ncols) = sign * b;
    if (art_col[r] >= 0) {
      t.rows(r, art_col[r]) = 1.0;
      t.basis[r] = art_col[r];
    } else {
      t.basis[r] = slack_begin + r;
    }
  }

  LpResult result;
  if (ncols > art_begin) {
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(ncols);
    phase1.tail(ncols - art_begin).setConstant(-1.0);
    t.set_objective(phase1);
    t.optimize(ncols);
    // obj[ncols] holds minus the phase-one value, i.e. the artificial mass.
    if (t.obj[ncols] > kFeasibilityEps) {
      result.status = LpStatus::kInfeasible;
      return result;
    }
    for (int r = 0; r < m; ++r) {
      if (t.basis[r] < art_begin) continue;
      for (int j = 0; j < art_begin; ++j) {
        if (std::abs(t.rows(r, j)) > kFeasibilityEps) {
          t.pivot(r, j);
          break;
        }
      }
      // A row with no usable pivot is redundant; its artificial stays basic at 0.
    }
  }

  Eigen::VectorXd cost = Eigen::VectorXd::Zero(ncols);
  for (int i = 0; i < n; ++i) {
    cost[i] = lp.objective[i];
    if (neg_col[i] >= 0) cost[neg_col[i]] = -lp.objective[i];
  }
  t.set_objective(cost);
  if (!t.optimize(art_begin)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }

  Eigen::VectorXd full = Eigen::VectorXd::Zero(ncols);
  for (int r = 0; r < m; ++r) full[t.basis[r]] = t.rows(r, ncols);
  result.x.resize(n);
  for (int i = 0; i < n; ++i) {
    result.x[i] = full[i] - (neg_col[i] >= 0 ? full[neg_col[i]] : 0.0);
  }
  result.value = lp.objective.dot(result.x);
  result.status = LpStatus::kOptimal;
  return result;
}

}  // namespace stackbandit
