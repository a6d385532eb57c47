#include <algorithm>

#include <gtest/gtest.h>

#include "stackbandit/geometry.h"
#include "test_util.h"

namespace stackbandit {
namespace {

using testing::make_g0;
using testing::unit_context;

bool contains_point(const std::vector<Eigen::VectorXd>& pts, const Eigen::VectorXd& x, double tol = 1e-9) {
  return std::any_of(pts.begin(), pts.end(),
                     [&](const Eigen::VectorXd& p) { return (p - x).cwiseAbs().maxCoeff() <= tol; });
}

std::vector<Eigen::VectorXd> strategies(const std::vector<MixedStrategy>& xs) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& x : xs) out.push_back(x.probs());
  return out;
}

std::vector<Eigen::VectorXd> menu_points(const ExtremePointSet& set) {
  std::vector<Eigen::VectorXd> out;
  for (const auto& p : set.points) out.push_back(p.strategy.probs());
  return out;
}

TEST(RegionHalfspaces, G0SegmentMembership) {
  const Game g = make_g0();
  const HalfspaceSystem s0 = region_halfspaces(g, unit_context(), BestResponseAssignment{{0}});
  const HalfspaceSystem s1 = region_halfspaces(g, unit_context(), BestResponseAssignment{{1}});
  EXPECT_EQ(s0.strict_slack(Eigen::Vector2d(0.5, 0.5)), std::numeric_limits<double>::infinity());
  for (int i = 0; i <= 100; ++i) {
    const double p = i / 100.0;
    const Eigen::Vector2d x(p, 1 - p);
    EXPECT_EQ(s0.contains_closed(x), p >= 0.5 - 1e-12) << p;
    // Action 1 must beat action 0 strictly; closure reaches p = 0.5.
    EXPECT_EQ(s1.contains_closed(x), p <= 0.5 + 1e-12) << p;
    const int br = follower_best_response(g, unit_context(), MixedStrategy(x), 0);
    EXPECT_EQ(s1.contains_closed(x) && s1.strict_slack(x) > 0, br == 1) << p;
  }
}

TEST(RegionHalfspaces, StrictlyDominatedActionHasNoInterior) {
  // Follower action 1 pays 0 and action 0 pays 0.5 whatever the leader does.
  const Game g(1, 2, 2, 1, {0, 0, 0, 0}, {0.5, 0, 0.5, 0});
  const HalfspaceSystem sys = region_halfspaces(g, unit_context(), BestResponseAssignment{{1}});
  EXPECT_TRUE(region_vertices(sys).empty());
  const auto w = interior_witness(sys);
  EXPECT_TRUE(!w || w->slack <= 0.0);
}

TEST(RegionVertices, WholeSimplexWhenFollowerHasOneAction) {
  Rng rng(4);
  const Game g = testing::random_game(rng, 2, 1, 3, 1);
  const HalfspaceSystem sys = region_halfspaces(g, testing::random_context(rng, 2), BestResponseAssignment{{0}});
  const auto v = strategies(region_vertices(sys));
  ASSERT_EQ(v.size(), 3u);
  for (int a = 0; a < 3; ++a) EXPECT_TRUE(contains_point(v, Eigen::Vector3d::Unit(a)));
}

TEST(RegionVertices, G0Endpoints) {
  const HalfspaceSystem sys = region_halfspaces(make_g0(), unit_context(), BestResponseAssignment{{0}});
  const auto v = strategies(region_vertices(sys));
  ASSERT_EQ(v.size(), 2u);
  EXPECT_TRUE(contains_point(v, Eigen::Vector2d(0.5, 0.5)));
  EXPECT_TRUE(contains_point(v, Eigen::Vector2d(1, 0)));
}

TEST(ApproximateExtremePoints, G0Menu) {
  const ExtremePointSet e = approximate_extreme_points(make_g0(), unit_context(), 0.01);
  const auto pts = menu_points(e);
  ASSERT_EQ(pts.size(), 4u);
  EXPECT_TRUE(contains_point(pts, Eigen::Vector2d(1, 0)));
  EXPECT_TRUE(contains_point(pts, Eigen::Vector2d(0.5, 0.5)));
  EXPECT_TRUE(contains_point(pts, Eigen::Vector2d(0, 1)));
  EXPECT_TRUE(contains_point(pts, Eigen::Vector2d(0.495, 0.505), 1e-12));
  int perturbed = 0;
  for (const auto& p : e.points) {
    if (p.perturbed) {
      ++perturbed;
      EXPECT_EQ(p.sigma.actions, std::vector<int>{1});
      EXPECT_NEAR(p.shift_l1, 0.01, 1e-12);
    }
  }
  EXPECT_EQ(perturbed, 1);
}

TEST(ApproximateExtremePoints, SingleFollowerActionGivesSimplexVertices) {
  Rng rng(8);
  const Game g = testing::random_game(rng, 3, 2, 4, 1);
  const ExtremePointSet e = approximate_extreme_points(g, testing::random_context(rng, 3), 0.001);
  ASSERT_EQ(e.points.size(), 4u);
  for (const auto& p : e.points) EXPECT_FALSE(p.perturbed);
  for (int a = 0; a < 4; ++a) EXPECT_TRUE(contains_point(menu_points(e), Eigen::Vector4d::Unit(a)));
}

TEST(ApproximateExtremePoints, RejectsNonPositiveDelta) {
  EXPECT_THROW(approximate_extreme_points(make_g0(), unit_context(), 0.0), std::invalid_argument);
}

TEST(ApproximateExtremePoints, MembershipSoundnessAndSizeBound) {
  Rng rng(31);
  for (int trial = 0; trial < 60; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(3));
    const int K = 1 + static_cast<int>(rng.index(3));
    const int nl = 2 + static_cast<int>(rng.index(2));
    const int nf = 1 + static_cast<int>(rng.index(3));
    const Game g = testing::random_game(rng, d, K, nl, nf);
    const Context z = testing::random_context(rng, d);
    const double delta = 0.01;
    const ExtremePointSet e = approximate_extreme_points(g, z, delta);
    ASSERT_FALSE(e.points.empty());
    for (const auto& p : e.points) {
      for (int k = 0; k < K; ++k) {
        ASSERT_EQ(testing::oracle_best_response(g, z, p.strategy.probs(), k), p.sigma.actions[k]);
      }
      ASSERT_LE(p.shift_l1, delta + 1e-12);
    }
    // Deduplicated under L-inf 1e-9.
    for (std::size_t i = 0; i < e.points.size(); ++i) {
      for (std::size_t j = i + 1; j < e.points.size(); ++j) {
        ASSERT_GT((e.points[i].strategy.probs() - e.points[j].strategy.probs()).cwiseAbs().maxCoeff(), 1e-9);
      }
    }
    std::size_t vertex_total = 0;
    for (const auto& r : e.regions) vertex_total += r.closure_vertices.size();
    ASSERT_LE(e.points.size(), vertex_total);
    const TypeGrouping groups = reduce_effective_types(g, z);
    ASSERT_LE(static_cast<double>(e.regions.size()),
              std::pow(static_cast<double>(nf), static_cast<double>(groups.representatives.size())));
  }
}

TEST(ApproximateExtremePoints, NearOptimalAgainstSampledStrategies) {
  Rng rng(17);
  for (int trial = 0; trial < 10; ++trial) {
    const Game g = testing::random_game(rng, 2, 2, 3, 3);
    const Context z = testing::random_context(rng, 2);
    const double delta = 1e-3;
    const ExtremePointSet e = approximate_extreme_points(g, z, delta);
    const Eigen::VectorXd mixture = rng.dirichlet(2);
    auto value = [&](const Eigen::VectorXd& x) {
      double v = 0.0;
      for (int k = 0; k < 2; ++k) v += mixture[k] * testing::oracle_payoff(g, z, x, k);
      return v;
    };
    double menu_best = -1e9;
    for (const auto& p : e.points) menu_best = std::max(menu_best, value(p.strategy.probs()));
    double sample_best = -1e9;
    for (int s = 0; s < 5000; ++s) sample_best = std::max(sample_best, value(rng.dirichlet(3)));
    ASSERT_GE(menu_best, sample_best - (delta + 1e-6));
  }
}

TEST(ApproximateExtremePoints, EffectiveTypeReductionPreservesUtilities) {
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    // Types 0 and 2 share payoffs, so reduction has something to merge.
    const Game base = testing::random_game(rng, 2, 2, 3, 2);
    std::vector<double> followers = base.follower_tensor();
    const std::size_t block = followers.size() / 2;
    followers.insert(followers.end(), followers.begin(), followers.begin() + static_cast<long>(block));
    const Game g(2, 3, 2, 3, base.leader_tensor(), followers);
    const Context z = testing::random_context(rng, 2);
    GeometryOptions reduced, full;
    full.use_effective_types = false;
    const ExtremePointSet a = approximate_extreme_points(g, z, 0.01, reduced);
    const ExtremePointSet b = approximate_extreme_points(g, z, 0.01, full);
    std::vector<Eigen::VectorXd> ua, ub;
    for (const auto& p : a.points) ua.push_back(utility_vector(g, z, p.strategy).values);
    for (const auto& p : b.points) ub.push_back(utility_vector(g, z, p.strategy).values);
    for (const auto& u : ua) ASSERT_TRUE(contains_point(ub, u));
    for (const auto& u : ub) ASSERT_TRUE(contains_point(ua, u));
  }
}

TEST(ReduceEffectiveTypes, CaseOneConstruction) {
  // Type 2 copies type 0 where the first context coordinate is positive and
  // type 1 elsewhere; with d = 2 this is linear in z only per region, so the
  // two regimes are built as separate games evaluated at one context each.
  Rng rng(12);
  const Game base = testing::random_game(rng, 1, 2, 2, 2);
  std::vector<double> f = base.follower_tensor();
  const std::size_t block = f.size() / 2;
  std::vector<double> as_zero(f.begin(), f.begin() + static_cast<long>(block));
  std::vector<double> as_one(f.begin() + static_cast<long>(block), f.end());
  std::vector<double> in_region = f;
  in_region.insert(in_region.end(), as_zero.begin(), as_zero.end());
  std::vector<double> off_region = f;
  off_region.insert(off_region.end(), as_one.begin(), as_one.end());
  const Game g_in(1, 2, 2, 3, base.leader_tensor(), in_region);
  const Game g_off(1, 2, 2, 3, base.leader_tensor(), off_region);
  const TypeGrouping in = reduce_effective_types(g_in, unit_context());
  EXPECT_EQ(in.representatives, (std::vector<int>{0, 1}));
  EXPECT_EQ(in.group_of, (std::vector<int>{0, 1, 0}));
  const TypeGrouping off = reduce_effective_types(g_off, unit_context());
  EXPECT_EQ(off.group_of, (std::vector<int>{0, 1, 1}));
}

TEST(ReduceEffectiveTypes, IdenticalAndDistinct) {
  EXPECT_EQ(reduce_effective_types(make_g0(3), unit_context()).representatives.size(), 1u);
  Rng rng(2);
  const Game g = testing::random_game(rng, 2, 4, 2, 2);
  const TypeGrouping t = reduce_effective_types(g, testing::random_context(rng, 2));
  EXPECT_EQ(t.representatives, (std::vector<int>{0, 1, 2, 3}));
  EXPECT_EQ(t.group_of, (std::vector<int>{0, 1, 2, 3}));
}

TEST(ReduceEffectiveTypes, ContextDependentCollapse) {
  // Forms differ only in the second coordinate; at z = (1, 0) they coincide.
  const Game g(2, 2, 1, 2, {0, 0, 0, 0}, {0.5, 0.5, 0.2, 0, 0.5, -0.5, 0.2, 0});
  EXPECT_EQ(reduce_effective_types(g, Context(Eigen::Vector2d(1, 0))).representatives.size(), 1u);
  EXPECT_EQ(reduce_effective_types(g, Context(Eigen::Vector2d(1, 1))).representatives.size(), 2u);
}

TEST(PruneDominatedActions, Examples) {
  Eigen::MatrixXd rows(2, 2);
  rows << 0, 0, 0.5, 0.5;
  EXPECT_EQ(prune_dominated_actions(rows), std::vector<int>{1});
  rows << 0.3, 0.3, 0.3, 0.3;
  EXPECT_EQ(prune_dominated_actions(rows), (std::vector<int>{0, 1}));
  rows << 1, 0, 0, 1;
  EXPECT_EQ(prune_dominated_actions(rows), (std::vector<int>{0, 1}));
}

TEST(ExogenousPoints, AcceptsValidAndListsRejects) {
  const Game g = make_g0();
  const std::vector<Eigen::VectorXd> good = {Eigen::Vector2d(0.7, 0.3), Eigen::Vector2d(0, 1)};
  const ExtremePointSet e = exogenous_extreme_points(g, unit_context(), good);
  ASSERT_EQ(e.points.size(), 2u);
  EXPECT_EQ(e.points[0].sigma.actions, std::vector<int>{0});
  EXPECT_EQ(e.points[1].sigma.actions, std::vector<int>{1});

  const std::vector<Eigen::VectorXd> bad = {Eigen::Vector2d(0.7, 0.3), Eigen::Vector2d(0.7, 0.7),
                                            Eigen::Vector3d(1, 0, 0)};
  try {
    exogenous_extreme_points(g, unit_context(), bad);
    FAIL() << "expected rejection";
  } catch (const std::invalid_argument& err) {
    const std::string msg = err.what();
    EXPECT_NE(msg.find("point 1"), std::string::npos);
    EXPECT_NE(msg.find("point 2"), std::string::npos);
    EXPECT_EQ(msg.find("point 0"), std::string::npos);
  }

  const std::vector<BestResponseAssignment> wrong = {BestResponseAssignment{{1}}, BestResponseAssignment{{1}}};
  EXPECT_THROW(exogenous_extreme_points(g, unit_context(), good, &wrong), std::invalid_argument);
}

TEST(ExogenousPoints, ParsesBothForms) {
  std::vector<Eigen::VectorXd> pts;
  std::vector<BestResponseAssignment> claims;
  parse_exogenous_points(nlohmann::json::parse("[[0.5, 0.5], [1, 0]]"), &pts, &claims);
  EXPECT_EQ(pts.size(), 2u);
  EXPECT_TRUE(claims.empty());
  pts.clear();
  parse_exogenous_points(nlohmann::json::parse(R"([{"x": [0.2, 0.8], "sigma": [1]}])"), &pts, &claims);
  ASSERT_EQ(claims.size(), 1u);
  EXPECT_EQ(claims[0].actions, std::vector<int>{1});
  pts.clear();
  EXPECT_THROW(parse_exogenous_points(nlohmann::json::parse(R"([{"x": [0.2, 0.8], "sigma": [1]}, [1, 0]])"),
                                      &pts, &claims),
               std::invalid_argument);
}

TEST(ExtremePointsJson, Shape) {
  const nlohmann::json j = extreme_points_to_json(approximate_extreme_points(make_g0(), unit_context(), 0.01));
  EXPECT_EQ(j.at("points").size(), 4u);
  EXPECT_EQ(j.at("regions").size(), 2u);
  EXPECT_TRUE(j.at("regions")[0].contains("vertices"));
  EXPECT_DOUBLE_EQ(j.at("delta").get<double>(), 0.01);
}

}  // namespace
}  // namespace stackbandit
