#include "stackbandit/geometry.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <utility>

#include "stackbandit/linprog.h"

namespace stackbandit {
namespace {

constexpr double kMembershipTol = 1e-9;
constexpr double kDedupTol = 1e-9;
constexpr double kRowDedupTol = 2e-12;
constexpr double kTypeEqualTol = 1e-12;
constexpr double kDominanceTol = 1e-12;
constexpr double kSingularPivot = 1e-10;

std::vector<int> support_indices(const HalfspaceSystem& system) {
  std::vector<int> idx;
  for (int i = 0; i < system.dim; ++i) {
    if (system.support.empty() || system.support[i]) idx.push_back(i);
  }
  return idx;
}

bool same_row(const Halfspace& a, const Halfspace& b) {
  return a.strict == b.strict && std::abs(a.offset - b.offset) <= kRowDedupTol &&
         (a.normal - b.normal).cwiseAbs().maxCoeff() <= kRowDedupTol;
}

// Rows for the given (type, action) pairs, deduplicated in insertion order.
HalfspaceSystem build_system(const PayoffTables& tables,
                             const std::vector<std::pair<int, int>>& assignment,
                             const std::vector<bool>& support) {
  HalfspaceSystem system;
  system.dim = static_cast<int>(tables.leader.rows());
  system.support = support;
  const int num_follower = static_cast<int>(tables.leader.cols());
  for (const auto& [k, a] : assignment) {
    const Eigen::MatrixXd& f = tables.followers[k];
    for (int other = 0; other < num_follower; ++other) {
      if (other == a) continue;
      Halfspace row{f.col(a) - f.col(other), 0.0, other < a};
      const bool duplicate = std::any_of(system.rows.begin(), system.rows.end(),
                                         [&](const Halfspace& r) { return same_row(r, row); });
      if (!duplicate) system.rows.push_back(std::move(row));
    }
  }
  return system;
}

// Gaussian elimination with partial pivoting on a dense n x n system stored
// row-major in `a`. Returns false for (numerically) singular systems.
bool solve_dense(std::vector<double>& a, std::vector<double>& b, int n) {
  for (int col = 0; col < n; ++col) {
    int pivot = col;
    double best = std::abs(a[col * n + col]);
    for (int r = col + 1; r < n; ++r) {
      const double v = std::abs(a[r * n + col]);
      if (v > best) {
        best = v;
        pivot = r;
      }
    }
    if (best < kSingularPivot) return false;
    if (pivot != col) {
      for (int c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (int r = col + 1; r < n; ++r) {
      const double factor = a[r * n + col] / a[col * n + col];
      if (factor == 0.0) continue;
      for (int c = col; c < n; ++c) a[r * n + c] -= factor * a[col * n + c];
      b[r] -= factor * b[col];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = b[r];
    for (int c = r + 1; c < n; ++c) s -= a[r * n + c] * b[c];
    b[r] = s / a[r * n + r];
  }
  return true;
}

void push_unique(std::vector<Eigen::VectorXd>& out, Eigen::VectorXd x) {
  for (const auto& y : out) {
    if ((x - y).cwiseAbs().maxCoeff() <= kDedupTol) return;
  }
  out.push_back(std::move(x));
}

std::vector<Eigen::VectorXd> enumerate_vertices(const HalfspaceSystem& system) {
  const std::vector<int> idx = support_indices(system);
  const int s = static_cast<int>(idx.size());
  std::vector<Eigen::VectorXd> vertices;
  if (s == 0) return vertices;

  // Candidate active constraints, restricted to the support: region rows
  // first, then the facets x_i = 0.
  struct Equation {
    std::vector<double> coef;
    double rhs;
  };
  std::vector<Equation> pool;
  for (const auto& row : system.rows) {
    Equation e{std::vector<double>(s), row.offset};
    for (int i = 0; i < s; ++i) e.coef[i] = row.normal[idx[i]];
    pool.push_back(std::move(e));
  }
  for (int i = 0; i < s; ++i) {
    Equation e{std::vector<double>(s, 0.0), 0.0};
    e.coef[i] = 1.0;
    pool.push_back(std::move(e));
  }

  const int pick = s - 1;
  const int pool_size = static_cast<int>(pool.size());
  if (pick > pool_size) return vertices;
  std::vector<int> combo(pick);
  for (int i = 0; i < pick; ++i) combo[i] = i;
  std::vector<double> a(static_cast<std::size_t>(s) * s);
  std::vector<double> b(s);
  while (true) {
    for (int r = 0; r < pick; ++r) {
      std::copy(pool[combo[r]].coef.begin(), pool[combo[r]].coef.end(), a.begin() + r * s);
      b[r] = pool[combo[r]].rhs;
    }
    std::fill(a.begin() + pick * s, a.end(), 1.0);
    b[pick] = 1.0;
    if (solve_dense(a, b, s)) {
      Eigen::VectorXd x = Eigen::VectorXd::Zero(system.dim);
      for (int i = 0; i < s; ++i) x[idx[i]] = b[i];
      if (system.contains_closed(x, kMembershipTol)) {
        x = x.cwiseMax(0.0);
        x /= x.sum();
        push_unique(vertices, std::move(x));
      }
    }
    // Next combination in lexicographic order.
    int i = pick - 1;
    while (i >= 0 && combo[i] == pool_size - pick + i) --i;
    if (i < 0) break;
    ++combo[i];
    for (int j = i + 1; j < pick; ++j) combo[j] = combo[j - 1] + 1;
  }
  return vertices;
}

bool lex_less(const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
  return std::lexicographical_compare(a.data(), a.data() + a.size(), b.data(),
                                      b.data() + b.size());
}

std::string describe(const BestResponseAssignment& sigma) {
  std::ostringstream os;
  os << "(";
  for (std::size_t i = 0; i < sigma.actions.size(); ++i) {
    os << (i ? "," : "") << sigma.actions[i];
  }
  os << ")";
  return os.str();
}

}  // namespace

bool HalfspaceSystem::contains_closed(const Eigen::VectorXd& x, double tol) const {
  if (x.size() != dim) return false;
  double total = 0.0;
  for (int i = 0; i < dim; ++i) {
    if (x[i] < -tol) return false;
    if (!support.empty() && !support[i] && x[i] > tol) return false;
    total += x[i];
  }
  if (std::abs(total - 1.0) > tol) return false;
  for (const auto& row : rows) {
    if (row.normal.dot(x) - row.offset < -tol) return false;
  }
  return true;
}

double HalfspaceSystem::strict_slack(const Eigen::VectorXd& x) const {
  double slack = std::numeric_limits<double>::infinity();
  for (const auto& row : rows) {
    if (row.strict) slack = std::min(slack, row.normal.dot(x) - row.offset);
  }
  return slack;
}

HalfspaceSystem region_halfspaces(const PayoffTables& tables,
                                  const BestResponseAssignment& sigma) {
  const int num_types = static_cast<int>(tables.followers.size());
  const int num_follower = static_cast<int>(tables.leader.cols());
  if (static_cast<int>(sigma.actions.size()) != num_types) {
    throw std::invalid_argument("region_halfspaces: assignment must cover every type");
  }
  std::vector<std::pair<int, int>> assignment;
  for (int k = 0; k < num_types; ++k) {
    if (sigma.actions[k] < 0 || sigma.actions[k] >= num_follower) {
      throw std::invalid_argument("region_halfspaces: follower action out of range");
    }
    assignment.emplace_back(k, sigma.actions[k]);
  }
  return build_system(tables, assignment, {});
}

HalfspaceSystem region_halfspaces(const Game& game, const Context& z,
                                  const BestResponseAssignment& sigma) {
  return region_halfspaces(game.tables(z), sigma);
}

std::vector<MixedStrategy> region_vertices(const HalfspaceSystem& system) {
  std::vector<MixedStrategy> out;
  for (auto& v : enumerate_vertices(system)) out.emplace_back(std::move(v));
  return out;
}

std::optional<InteriorWitness> interior_witness(const HalfspaceSystem& system) {
  const std::vector<int> idx = support_indices(system);
  const int s = static_cast<int>(idx.size());
  if (s == 0) return std::nullopt;
  const int n = s + 1;  // support coordinates, then the slack t
  const int m = static_cast<int>(system.rows.size()) + 1;

  LinearProgram lp;
  lp.objective = Eigen::VectorXd::Zero(n);
  lp.objective[s] = 1.0;
  lp.a_ub = Eigen::MatrixXd::Zero(m, n);
  lp.b_ub = Eigen::VectorXd::Zero(m);
  for (int r = 0; r < m - 1; ++r) {
    const Halfspace& row = system.rows[r];
    for (int i = 0; i < s; ++i) lp.a_ub(r, i) = -row.normal[idx[i]];
    if (row.strict) lp.a_ub(r, s) = 1.0;
    lp.b_ub[r] = -row.offset;
  }
  lp.a_ub(m - 1, s) = 1.0;
  lp.b_ub[m - 1] = 1.0;
  lp.a_eq = Eigen::MatrixXd::Zero(1, n);
  lp.a_eq.row(0).head(s).setOnes();
  lp.b_eq = Eigen::VectorXd::Ones(1);
  lp.free_vars.assign(n, false);
  lp.free_vars[s] = true;

  const LpResult res = solve_lp(lp);
  if (res.status == LpStatus::kInfeasible) return std::nullopt;
  if (res.status != LpStatus::kOptimal) {
    throw std::runtime_error("interior_witness: LP did not reach an optimum");
  }
  InteriorWitness w;
  w.x = Eigen::VectorXd::Zero(system.dim);
  for (int i = 0; i < s; ++i) w.x[idx[i]] = std::max(0.0, res.x[i]);
  w.x /= w.x.sum();
  w.slack = std::min(1.0, system.strict_slack(w.x));
  return w;
}

TypeGrouping reduce_effective_types(const PayoffTables& tables) {
  TypeGrouping g;
  const int num_types = static_cast<int>(tables.followers.size());
  g.group_of.assign(num_types, -1);
  for (int k = 0; k < num_types; ++k) {
    for (std::size_t r = 0; r < g.representatives.size(); ++r) {
      const auto& rep = tables.followers[g.representatives[r]];
      if ((tables.followers[k] - rep).cwiseAbs().maxCoeff() <= kTypeEqualTol) {
        g.group_of[k] = static_cast<int>(r);
        break;
      }
    }
    if (g.group_of[k] < 0) {
      g.group_of[k] = static_cast<int>(g.representatives.size());
      g.representatives.push_back(k);
    }
  }
  return g;
}

TypeGrouping reduce_effective_types(const Game& game, const Context& z) {
  return reduce_effective_types(game.tables(z));
}

std::vector<int> prune_dominated_actions(const Eigen::MatrixXd& leader_payoffs) {
  std::vector<int> surviving;
  for (int a = 0; a < leader_payoffs.rows(); ++a) surviving.push_back(a);
  for (int a = 0; a < leader_payoffs.rows(); ++a) {
    for (int other : surviving) {
      if (other == a) continue;
      const Eigen::RowVectorXd diff = leader_payoffs.row(other) - leader_payoffs.row(a);
      if (diff.minCoeff() >= -kDominanceTol && diff.maxCoeff() > kDominanceTol) {
        surviving.erase(std::find(surviving.begin(), surviving.end(), a));
        break;
      }
    }
  }
  return surviving;
}

std::vector<int> prune_dominated_actions(const Game& game, const Context& z) {
  return prune_dominated_actions(game.tables(z).leader);
}

ExtremePointSet approximate_extreme_points(const Game& game, const Context& z, double delta,
                                           const GeometryOptions& options) {
  if (!(delta > 0.0)) throw std::invalid_argument("approximate_extreme_points: delta must be > 0");
  const PayoffTables tables = game.tables(z);
  const int num_types = game.follower_types();
  const int num_follower = game.follower_actions();

  TypeGrouping grouping;
  if (options.use_effective_types) {
    grouping = reduce_effective_types(tables);
  } else {
    for (int k = 0; k < num_types; ++k) {
      grouping.representatives.push_back(k);
      grouping.group_of.push_back(k);
    }
  }
  std::vector<bool> support;
  if (options.prune_dominated) {
    support.assign(game.leader_actions(), false);
    for (int a : prune_dominated_actions(tables.leader)) support[a] = true;
  }

  ExtremePointSet out;
  out.delta = delta;
  const auto& reps = grouping.representatives;
  const int depth = static_cast<int>(reps.size());
  std::vector<std::pair<int, int>> partial;

  auto expand = [&]() {
    BestResponseAssignment sigma;
    sigma.actions.resize(num_types);
    for (int k = 0; k < num_types; ++k) sigma.actions[k] = partial[grouping.group_of[k]].second;
    return sigma;
  };

  auto emit_region = [&](const HalfspaceSystem& system, const InteriorWitness& witness) {
    const BestResponseAssignment sigma = expand();
    RegionSummary region{sigma, witness.slack, enumerate_vertices(system)};
    std::vector<Eigen::VectorXd> members;
    std::vector<std::pair<bool, double>> info;
    for (const Eigen::VectorXd& v : region.closure_vertices) {
      Eigen::VectorXd x = v;
      bool perturbed = false;
      if (best_responses(tables, x) != sigma.actions) {
        perturbed = true;
        const Eigen::VectorXd dir = witness.x - v;
        const double reach = dir.lpNorm<1>();
        double step = std::min(delta, reach);
        while (true) {
          x = reach > 0.0 ? Eigen::VectorXd(v + (step / reach) * dir) : witness.x;
          if (best_responses(tables, x) == sigma.actions) break;
          if (step >= reach) {
            throw GeometryError("approximate_extreme_points: witness of region " +
                                    describe(sigma) + " is not a member",
                                sigma);
          }
          step = std::min(2.0 * step, reach);
        }
      }
      bool dup = false;
      for (const auto& y : members) dup = dup || (x - y).cwiseAbs().maxCoeff() <= kDedupTol;
      if (dup) continue;
      info.emplace_back(perturbed, perturbed ? (x - v).lpNorm<1>() : 0.0);
      members.push_back(std::move(x));
    }
    std::vector<std::size_t> order(members.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return lex_less(members[j], members[i]); });
    for (std::size_t i : order) {
      out.points.push_back(
          ExtremePoint{MixedStrategy(members[i]), sigma, info[i].first, info[i].second});
    }
    out.regions.push_back(std::move(region));
  };

  // Depth-first over representative types; a partial assignment whose
  // region has no strict interior cannot be completed.
  auto visit = [&](auto&& self, int level) -> void {
    for (int a = 0; a < num_follower; ++a) {
      partial.emplace_back(reps[level], a);
      const HalfspaceSystem system = build_system(tables, partial, support);
      std::optional<InteriorWitness> witness;
      try {
        witness = interior_witness(system);
      } catch (const std::exception& e) {
        BestResponseAssignment partial_sigma;
        for (const auto& [k, act] : partial) partial_sigma.actions.push_back(act);
        throw GeometryError(std::string(e.what()) + " for partial assignment " +
                                describe(partial_sigma),
                            partial_sigma);
      }
      if (witness && witness->slack > kWitnessSlack) {
        if (level + 1 == depth) {
          emit_region(system, *witness);
        } else {
          self(self, level + 1);
        }
      }
      partial.pop_back();
    }
  };
  visit(visit, 0);
  return out;
}

ExtremePointSet exogenous_extreme_points(const Game& game, const Context& z,
                                         const std::vector<Eigen::VectorXd>& points,
                                         const std::vector<BestResponseAssignment>* claimed) {
  if (claimed && claimed->size() != points.size()) {
    throw std::invalid_argument("exogenous points: claimed assignments do not match point count");
  }
  const PayoffTables tables = game.tables(z);
  ExtremePointSet out;
  std::ostringstream errors;
  bool failed = false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != game.leader_actions()) {
      errors << " point " << i << ": wrong dimension;";
      failed = true;
      continue;
    }
    try {
      MixedStrategy x(points[i]);
      BestResponseAssignment sigma{best_responses(tables, x.probs())};
      if (claimed && (*claimed)[i] != sigma) {
        errors << " point " << i << ": claimed assignment " << describe((*claimed)[i])
               << " but followers respond " << describe(sigma) << ";";
        failed = true;
        continue;
      }
      out.points.push_back(ExtremePoint{std::move(x), std::move(sigma), false, 0.0});
    } catch (const std::invalid_argument& e) {
      errors << " point " << i << ": " << e.what() << ";";
      failed = true;
    }
  }
  if (failed) throw std::invalid_argument("exogenous points rejected:" + errors.str());
  if (out.points.empty()) throw std::invalid_argument("exogenous points: empty list");
  return out;
}

void parse_exogenous_points(const nlohmann::json& doc, std::vector<Eigen::VectorXd>* points,
                            std::vector<BestResponseAssignment>* claimed) {
  if (!doc.is_array()) throw std::invalid_argument("exogenous points: expected a JSON array");
  std::size_t with_claim = 0;
  std::vector<BestResponseAssignment> claims;
  for (const auto& item : doc) {
    const nlohmann::json& xs = item.is_object() ? item.at("x") : item;
    std::vector<double> v = xs.get<std::vector<double>>();
    points->push_back(Eigen::Map<Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    if (item.is_object() && item.contains("sigma")) {
      ++with_claim;
      claims.push_back(BestResponseAssignment{item.at("sigma").get<std::vector<int>>()});
    } else {
      claims.emplace_back();
    }
  }
  if (with_claim != 0 && with_claim != claims.size()) {
    throw std::invalid_argument("exogenous points: give a sigma for every point or for none");
  }
  if (claimed && with_claim != 0) *claimed = std::move(claims);
}

nlohmann::json extreme_points_to_json(const ExtremePointSet& set) {
  auto vec = [](const Eigen::VectorXd& v) { return std::vector<double>(v.data(), v.data() + v.size()); };
  nlohmann::json regions = nlohmann::json::array();
  for (const auto& r : set.regions) {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : r.closure_vertices) verts.push_back(vec(v));
    regions.push_back({{"sigma", r.sigma.actions},
                       {"witness_slack", r.witness_slack},
                       {"vertices", std::move(verts)}});
  }
  nlohmann::json points = nlohmann::json::array();
  for (const auto& p : set.points) {
    points.push_back({{"x", vec(p.strategy.probs())},
                      {"sigma", p.sigma.actions},
                      {"perturbed", p.perturbed},
                      {"shift_l1", p.shift_l1}});
  }
  return {{"delta", set.delta}, {"regions", std::move(regions)}, {"points", std::move(points)}};
}

}  // namespace stackbandit
