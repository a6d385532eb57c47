#include <gtest/gtest.h>

#include "stackbandit/linprog.h"
#include "test_util.h"

namespace stackbandit {
namespace {

LinearProgram ub_only(Eigen::MatrixXd a, Eigen::VectorXd b, Eigen::VectorXd c, bool free = false) {
  LinearProgram lp;
  lp.objective = std::move(c);
  lp.a_ub = std::move(a);
  lp.b_ub = std::move(b);
  lp.a_eq = Eigen::MatrixXd(0, lp.objective.size());
  lp.b_eq = Eigen::VectorXd(0);
  if (free) lp.free_vars.assign(lp.objective.size(), true);
  return lp;
}

TEST(SolveLp, SimplexCorner) {
  // max x subject to x + y <= 1, x, y >= 0.
  Eigen::MatrixXd a(1, 2);
  a << 1, 1;
  const LpResult r = solve_lp(ub_only(a, Eigen::VectorXd::Ones(1), Eigen::Vector2d(1, 0)));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
  EXPECT_NEAR(r.x[0], 1.0, 1e-12);
  EXPECT_NEAR(r.x[1], 0.0, 1e-12);
}

TEST(SolveLp, InfeasibleAndUnbounded) {
  Eigen::MatrixXd a(2, 1);
  a << 1, -1;
  // x <= -1 with x >= 0.
  EXPECT_EQ(solve_lp(ub_only(a.topRows(1), Eigen::VectorXd::Constant(1, -1), Eigen::VectorXd::Ones(1))).status,
            LpStatus::kInfeasible);
  // max x with only -x <= 0.
  EXPECT_EQ(solve_lp(ub_only(a.bottomRows(1), Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1))).status,
            LpStatus::kUnbounded);
}

TEST(SolveLp, EqualityAndFreeVariables) {
  // max -x - y subject to x + y == 1, x - y <= 3, x, y free, x >= -5, y >= -5.
  LinearProgram lp;
  lp.objective = Eigen::Vector2d(1, -1);
  lp.a_ub.resize(3, 2);
  lp.a_ub << 1, -1, -1, 0, 0, -1;
  lp.b_ub = Eigen::Vector3d(3, 5, 5);
  lp.a_eq.resize(1, 2);
  lp.a_eq << 1, 1;
  lp.b_eq = Eigen::VectorXd::Ones(1);
  lp.free_vars = {true, true};
  const LpResult r = solve_lp(lp);
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_NEAR(r.x[0], 2.0, 1e-12);
  EXPECT_NEAR(r.x[1], -1.0, 1e-12);
  EXPECT_NEAR(r.value, 3.0, 1e-12);
}

TEST(SolveLp, ZeroObjectiveReturnsFeasiblePoint) {
  Eigen::MatrixXd a(3, 2);
  a << -1, 0, 0, -1, 1, 1;
  const LpResult r = solve_lp(ub_only(a, Eigen::Vector3d(0, 0, 1), Eigen::Vector2d::Zero(), true));
  ASSERT_EQ(r.status, LpStatus::kOptimal);
  EXPECT_TRUE(((a * r.x - Eigen::Vector3d(0, 0, 1)).array() <= 1e-9).all());
  EXPECT_EQ(r.value, 0.0);
}

TEST(SolveLp, DeterministicOnRepeat) {
  Rng rng(1);
  Eigen::MatrixXd a = Eigen::MatrixXd::Random(6, 3);
  const LinearProgram lp = ub_only(a, Eigen::VectorXd::Ones(6), Eigen::Vector3d(0.3, -0.2, 0.1));
  const LpResult r1 = solve_lp(lp);
  const LpResult r2 = solve_lp(lp);
  EXPECT_EQ(r1.status, r2.status);
  EXPECT_EQ(r1.x, r2.x);
}

TEST(SolveLp, MatchesBasisEnumerationOnRandomBoundedPolytopes) {
  Rng rng(99);
  for (int trial = 0; trial < 200; ++trial) {
    const int p = 1 + static_cast<int>(rng.index(4));
    const int extra = static_cast<int>(rng.index(4));
    // Box [-1, 1]^p plus random cuts through slack around the origin.
    Eigen::MatrixXd a(2 * p + extra, p);
    Eigen::VectorXd b(2 * p + extra);
    a.setZero();
    for (int i = 0; i < p; ++i) {
      a(2 * i, i) = 1;
      a(2 * i + 1, i) = -1;
      b[2 * i] = b[2 * i + 1] = 1;
    }
    for (int r = 0; r < extra; ++r) {
      for (int i = 0; i < p; ++i) a(2 * p + r, i) = rng.uniform(-1, 1);
      b[2 * p + r] = rng.uniform(0.05, 1.0);
    }
    Eigen::VectorXd c(p);
    for (int i = 0; i < p; ++i) c[i] = rng.uniform(-1, 1);
    const LpResult r = solve_lp(ub_only(a, b, c, true));
    ASSERT_EQ(r.status, LpStatus::kOptimal);
    ASSERT_NEAR(r.value, testing::brute_force_lp_max(a, b, c), 1e-9);
    ASSERT_TRUE(((a * r.x - b).array() <= 1e-9).all());
  }
}

}  // namespace
}  // namespace stackbandit
