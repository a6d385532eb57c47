#include "stackbandit/markets.h"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <string>

#include "stackbandit/linprog.h"

namespace stackbandit {
namespace {

constexpr double kRangeSlack = 1e-12;
constexpr int kMaxGuardDim = 16;

void grid_recurse(int K, int remaining, std::vector<int>& prefix,
                  std::vector<std::vector<int>>& out) {
  if (static_cast<int>(prefix.size()) == K - 1) {
    prefix.push_back(remaining);
    out.push_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int n = remaining; n >= 0; --n) {
    prefix.push_back(n);
    grid_recurse(K, remaining - n, prefix, out);
    prefix.pop_back();
  }
}

Eigen::VectorXd json_vector(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array");
  Eigen::VectorXd v(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

Eigen::MatrixXd json_matrix(const nlohmann::json& j, const char* what) {
  if (!j.is_array()) throw std::invalid_argument(std::string(what) + " must be an array of rows");
  const std::size_t rows = j.size();
  const std::size_t cols = rows ? j[0].size() : 0;
  Eigen::MatrixXd m(rows, cols);
  for (std::size_t r = 0; r < rows; ++r) {
    if (!j[r].is_array() || j[r].size() != cols) {
      throw std::invalid_argument(std::string(what) + ": ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

nlohmann::json to_json(const Eigen::VectorXd& v) {
  return std::vector<double>(v.data(), v.data() + v.size());
}

nlohmann::json to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(to_json(Eigen::VectorXd(m.row(r).transpose())));
  return rows;
}

void check_omega(const Eigen::VectorXd& omega, int K, const char* who) {
  if (omega.size() != K) throw std::invalid_argument(std::string(who) + ": omega has wrong length");
  if (!omega.allFinite() || omega.minCoeff() < -1e-9 || std::abs(omega.sum() - 1.0) > 1e-6) {
    throw std::invalid_argument(std::string(who) + ": omega is not in the simplex");
  }
}

std::vector<std::uint64_t> bits_of(const Eigen::VectorXd& v) {
  std::vector<std::uint64_t> key(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    key[i] = std::bit_cast<std::uint64_t>(v[i] == 0.0 ? 0.0 : v[i]);
  }
  return key;
}

LinearProgram polytope_lp(const PersuasionSpec& spec, Eigen::VectorXd objective) {
  LinearProgram lp;
  lp.objective = std::move(objective);
  lp.a_ub = spec.A;
  lp.b_ub = spec.c;
  lp.a_eq = Eigen::MatrixXd(0, spec.p);
  lp.b_eq = Eigen::VectorXd(0);
  lp.free_vars.assign(spec.p, true);
  return lp;
}

template <typename Policy, typename Utilities>
ApplicationActionSet collect_actions(const SimplexGrid& grid, Policy policy, Utilities utilities) {
  if (grid.size() == 0) throw std::invalid_argument("application_action_set: empty grid");
  ApplicationActionSet set;
  std::map<std::vector<std::uint64_t>, int> seen;
  set.action_of.resize(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) {
    Eigen::VectorXd action = policy(grid.point(g));
    auto [it, inserted] = seen.emplace(bits_of(action), static_cast<int>(set.actions.size()));
    if (inserted) {
      set.utilities.push_back(utilities(action));
      set.actions.push_back(std::move(action));
      set.grid_points.emplace_back();
    }
    set.grid_points[it->second].push_back(static_cast<int>(g));
    set.action_of[g] = it->second;
  }
  return set;
}

}  // namespace

Eigen::VectorXd SimplexGrid::point(std::size_t i) const {
  const auto& n = numerators.at(i);
  Eigen::VectorXd w(K);
  for (int k = 0; k < K; ++k) w[k] = static_cast<double>(n[k]) / N;
  return w;
}

GridTooLarge::GridTooLarge(std::uint64_t count, std::uint64_t cap)
    : std::runtime_error("simplex grid would have " + std::to_string(count) +
                         " points, above the cap of " + std::to_string(cap) +
                         "; lower the grid granularity N or raise the cap"),
      count_(count) {}

std::uint64_t simplex_grid_size(int K, int N) {
  if (K < 1 || N < 1) throw std::invalid_argument("simplex_grid: K and N must be positive");
  unsigned __int128 r = 1;
  const unsigned __int128 limit = std::numeric_limits<std::uint64_t>::max();
  for (int i = 1; i < K; ++i) {
    r = r * static_cast<unsigned>(N + i) / static_cast<unsigned>(i);
    if (r > limit) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(r);
}

SimplexGrid simplex_grid(int K, int N, std::uint64_t cap) {
  const std::uint64_t count = simplex_grid_size(K, N);
  if (count > cap) throw GridTooLarge(count, cap);
  SimplexGrid grid;
  grid.K = K;
  grid.N = N;
  grid.numerators.reserve(count);
  std::vector<int> prefix;
  grid_recurse(K, N, prefix, grid.numerators);
  return grid;
}

void AuctionSpec::validate() const {
  if (m < 1 || d < 1) throw std::invalid_argument("AuctionSpec: m and d must be positive");
  if (thresholds.empty()) throw std::invalid_argument("AuctionSpec: need at least one threshold vector");
  if (static_cast<int>(valuations.size()) != m) {
    throw std::invalid_argument("AuctionSpec: need one valuation weight vector per item");
  }
  for (const auto& th : thresholds) {
    if (th.size() != m) throw std::invalid_argument("AuctionSpec: threshold vector has wrong length");
    if (!th.allFinite() || th.minCoeff() < 0.0 || th.maxCoeff() > 1.0) {
      throw std::invalid_argument("AuctionSpec: thresholds must lie in [0, 1]");
    }
  }
  double bound = 0.0;
  for (int j = 0; j < m; ++j) {
    const auto& w = valuations[j];
    if (w.size() != d) throw std::invalid_argument("AuctionSpec: valuation weights have wrong length");
    if (!w.allFinite()) throw std::invalid_argument("AuctionSpec: non-finite valuation weight");
    double top = 0.0;
    for (const auto& th : thresholds) top = std::max(top, th[j]);
    bound += w.lpNorm<1>() + top;
  }
  if (bound > 1.0 + kRangeSlack) {
    throw std::invalid_argument("AuctionSpec: sum_j (||w_j||_1 + max_i theta_i[j]) = " +
                                std::to_string(bound) + " exceeds 1; utilities could leave [-1, 1]");
  }
}

Eigen::VectorXd item_values(const AuctionSpec& spec, const Context& z) {
  if (z.dim() != spec.d) throw std::invalid_argument("auction: context has wrong dimension");
  Eigen::VectorXd v(spec.m);
  for (int j = 0; j < spec.m; ++j) v[j] = spec.valuations[j].dot(z.z());
  return v;
}

AuctionOutcome auction_outcome(const AuctionSpec& spec, const Context& z,
                               const Eigen::VectorXd& bid, const Eigen::VectorXd& theta) {
  if (bid.size() != spec.m || theta.size() != spec.m) {
    throw std::invalid_argument("auction_outcome: bid and threshold need one entry per item");
  }
  const Eigen::VectorXd v = item_values(spec, z);
  AuctionOutcome out;
  for (int j = 0; j < spec.m; ++j) {
    if (bid[j] >= theta[j]) {
      out.won.push_back(j);
      out.utility += v[j] - theta[j];
    }
  }
  return out;
}

double auction_objective(const AuctionSpec& spec, const Context& z, const Eigen::VectorXd& bid,
                         const Eigen::VectorXd& omega) {
  check_omega(omega, spec.types(), "auction_objective");
  double total = 0.0;
  for (int i = 0; i < spec.types(); ++i) {
    total += omega[i] * auction_outcome(spec, z, bid, spec.thresholds[i]).utility;
  }
  return total;
}

Eigen::VectorXd auction_policy_bid(const AuctionSpec& spec, const Context& z,
                                   const Eigen::VectorXd& omega) {
  check_omega(omega, spec.types(), "auction_policy_bid");
  const Eigen::VectorXd v = item_values(spec, z);
  const int K = spec.types();
  Eigen::VectorXd bid(spec.m);
  std::vector<double> candidates;
  for (int j = 0; j < spec.m; ++j) {
    candidates.assign(1, 0.0);
    for (int i = 0; i < K; ++i) candidates.push_back(spec.thresholds[i][j]);
    std::sort(candidates.begin(), candidates.end());
    double best_bid = 0.0;
    double best_value = -std::numeric_limits<double>::infinity();
    for (double c : candidates) {
      double value = 0.0;
      for (int i = 0; i < K; ++i) {
        if (c >= spec.thresholds[i][j]) value += omega[i] * (v[j] - spec.thresholds[i][j]);
      }
      if (value > best_value) {
        best_value = value;
        best_bid = c;
      }
    }
    bid[j] = best_bid;
  }
  return bid;
}

void PersuasionSpec::validate() const {
  if (p < 1 || d < 1) throw std::invalid_argument("PersuasionSpec: p and d must be positive");
  if (A.cols() != p || A.rows() < 1 || c.size() != A.rows()) {
    throw std::invalid_argument("PersuasionSpec: polytope rows must be p wide with one bound each");
  }
  if (!A.allFinite() || !c.allFinite()) throw std::invalid_argument("PersuasionSpec: non-finite polytope");
  if (C.empty()) throw std::invalid_argument("PersuasionSpec: need at least one receiver type");
  for (const auto& Ci : C) {
    if (Ci.rows() != d || Ci.cols() != p) {
      throw std::invalid_argument("PersuasionSpec: type matrices must be d x p");
    }
    if (!Ci.allFinite()) throw std::invalid_argument("PersuasionSpec: non-finite type matrix");
  }
  if (solve_lp(polytope_lp(*this, Eigen::VectorXd::Zero(p))).status != LpStatus::kOptimal) {
    throw std::invalid_argument("PersuasionSpec: polytope is empty");
  }
  for (int k = 0; k < p; ++k) {
    for (double sign : {1.0, -1.0}) {
      Eigen::VectorXd dir = Eigen::VectorXd::Zero(p);
      dir[k] = sign;
      if (solve_lp(polytope_lp(*this, dir)).status != LpStatus::kOptimal) {
        throw std::invalid_argument("PersuasionSpec: polytope is unbounded along coordinate " +
                                    std::to_string(k));
      }
    }
  }
  if (d > kMaxGuardDim) {
    throw std::invalid_argument("PersuasionSpec: range guard supports d <= " +
                                std::to_string(kMaxGuardDim));
  }
  // |z^T C mu| is convex in z, so its maximum over the box sits at a corner.
  for (std::uint32_t mask = 0; mask < (1u << d); ++mask) {
    Eigen::VectorXd z(d);
    for (int j = 0; j < d; ++j) z[j] = (mask >> j) & 1u ? -1.0 : 1.0;
    for (const auto& Ci : C) {
      const Eigen::VectorXd dir = Ci.transpose() * z;
      const double hi = solve_lp(polytope_lp(*this, dir)).value;
      const double lo = -solve_lp(polytope_lp(*this, -dir)).value;
      if (hi > 1.0 + kRangeSlack || lo < -1.0 - kRangeSlack) {
        throw std::invalid_argument("PersuasionSpec: utilities leave [-1, 1] on the context box");
      }
    }
  }
}

double persuasion_utility(const PersuasionSpec& spec, const Context& z, const Eigen::VectorXd& mu,
                          int type) {
  if (type < 0 || type >= spec.types()) throw std::out_of_range("persuasion: receiver type out of range");
  if (z.dim() != spec.d || mu.size() != spec.p) {
    throw std::invalid_argument("persuasion: context or signal has wrong dimension");
  }
  return z.z().dot(spec.C[type] * mu);
}

Eigen::VectorXd persuasion_policy_signal(const PersuasionSpec& spec, const Context& z,
                                         const Eigen::VectorXd& omega) {
  check_omega(omega, spec.types(), "persuasion_policy_signal");
  if (z.dim() != spec.d) throw std::invalid_argument("persuasion: context has wrong dimension");
  Eigen::VectorXd objective = Eigen::VectorXd::Zero(spec.p);
  for (int i = 0; i < spec.types(); ++i) {
    if (omega[i] != 0.0) objective += omega[i] * (spec.C[i].transpose() * z.z());
  }
  const LpResult r = solve_lp(polytope_lp(spec, objective));
  if (r.status == LpStatus::kInfeasible) {
    throw std::runtime_error("persuasion_policy_signal: signaling polytope is empty");
  }
  if (r.status == LpStatus::kUnbounded) {
    throw std::runtime_error("persuasion_policy_signal: signaling polytope is unbounded");
  }
  return r.x;
}

ApplicationActionSet application_action_set(const AuctionSpec& spec, const Context& z,
                                            const SimplexGrid& grid) {
  if (grid.K != spec.types()) throw std::invalid_argument("application_action_set: grid K mismatch");
  return collect_actions(
      grid, [&](const Eigen::VectorXd& w) { return auction_policy_bid(spec, z, w); },
      [&](const Eigen::VectorXd& bid) {
        Eigen::VectorXd u(spec.types());
        for (int i = 0; i < spec.types(); ++i) {
          u[i] = auction_outcome(spec, z, bid, spec.thresholds[i]).utility;
        }
        return u;
      });
}

ApplicationActionSet application_action_set(const PersuasionSpec& spec, const Context& z,
                                            const SimplexGrid& grid) {
  if (grid.K != spec.types()) throw std::invalid_argument("application_action_set: grid K mismatch");
  return collect_actions(
      grid, [&](const Eigen::VectorXd& w) { return persuasion_policy_signal(spec, z, w); },
      [&](const Eigen::VectorXd& mu) {
        Eigen::VectorXd u(spec.types());
        for (int i = 0; i < spec.types(); ++i) u[i] = persuasion_utility(spec, z, mu, i);
        return u;
      });
}

nlohmann::json auction_to_json(const AuctionSpec& spec) {
  nlohmann::json th = nlohmann::json::array();
  for (const auto& t : spec.thresholds) th.push_back(to_json(t));
  nlohmann::json val = nlohmann::json::array();
  for (const auto& w : spec.valuations) val.push_back(to_json(w));
  return {{"kind", "auction"}, {"m", spec.m}, {"d", spec.d}, {"thresholds", th}, {"valuations", val}};
}

AuctionSpec auction_from_json(const nlohmann::json& j) {
  AuctionSpec spec;
  spec.m = j.at("m").get<int>();
  spec.d = j.at("d").get<int>();
  for (const auto& t : j.at("thresholds")) spec.thresholds.push_back(json_vector(t, "thresholds"));
  for (const auto& w : j.at("valuations")) spec.valuations.push_back(json_vector(w, "valuations"));
  spec.validate();
  return spec;
}

nlohmann::json persuasion_to_json(const PersuasionSpec& spec) {
  nlohmann::json mats = nlohmann::json::array();
  for (const auto& Ci : spec.C) mats.push_back(to_json(Ci));
  return {{"kind", "persuasion"}, {"p", spec.p}, {"d", spec.d},
          {"A", to_json(spec.A)}, {"c", to_json(spec.c)}, {"C", mats}};
}

PersuasionSpec persuasion_from_json(const nlohmann::json& j) {
  PersuasionSpec spec;
  spec.p = j.at("p").get<int>();
  spec.d = j.at("d").get<int>();
  spec.A = json_matrix(j.at("A"), "A");
  spec.c = json_vector(j.at("c"), "c");
  for (const auto& Ci : j.at("C")) spec.C.push_back(json_matrix(Ci, "C"));
  spec.validate();
  return spec;
}

AuctionSpec generate_auction(Rng& rng, int m, int d, int K) {
  if (m < 1 || d < 1 || K < 1) throw std::invalid_argument("generate_auction: sizes must be positive");
  AuctionSpec spec;
  spec.m = m;
  spec.d = d;
  const double share = 1.0 / (2.0 * m);
  for (int i = 0; i < K; ++i) {
    Eigen::VectorXd th(m);
    for (int j = 0; j < m; ++j) th[j] = rng.uniform(0.0, share);
    spec.thresholds.push_back(th);
  }
  for (int j = 0; j < m; ++j) {
    Eigen::VectorXd w(d);
    // A positive weight on the first coordinate makes items valuable on
    // average when that coordinate is a constant 1.
    w[0] = rng.uniform(0.5, 1.0);
    for (int k = 1; k < d; ++k) w[k] = rng.uniform(-1.0, 1.0);
    spec.valuations.push_back(w * (share / w.lpNorm<1>()));
  }
  spec.validate();
  return spec;
}

PersuasionSpec generate_persuasion(Rng& rng, int p, int d, int K, int cuts) {
  if (p < 1 || d < 1 || K < 1 || cuts < 0) {
    throw std::invalid_argument("generate_persuasion: sizes must be positive");
  }
  PersuasionSpec spec;
  spec.p = p;
  spec.d = d;
  const int rows = p + 1 + cuts;
  spec.A = Eigen::MatrixXd::Zero(rows, p);
  spec.c = Eigen::VectorXd::Zero(rows);
  for (int k = 0; k < p; ++k) spec.A(k, k) = -1.0;
  spec.A.row(p).setOnes();
  spec.c[p] = 1.0;
  const Eigen::VectorXd center = Eigen::VectorXd::Constant(p, 1.0 / (p + 1));
  for (int r = 0; r < cuts; ++r) {
    Eigen::VectorXd a(p);
    for (int k = 0; k < p; ++k) a[k] = rng.uniform(-1.0, 1.0);
    a /= std::max(a.norm(), 1e-12);
    spec.A.row(p + 1 + r) = a.transpose();
    spec.c[p + 1 + r] = a.dot(center) + 0.1;
  }
  for (int i = 0; i < K; ++i) {
    Eigen::MatrixXd Ci(d, p);
    for (int r = 0; r < d; ++r) {
      for (int k = 0; k < p; ++k) Ci(r, k) = rng.uniform(-1.0, 1.0);
    }
    const double col = Ci.cwiseAbs().colwise().sum().maxCoeff();
    spec.C.push_back(Ci / std::max(col, 1e-12));
  }
  spec.validate();
  return spec;
}

}  // namespace stackbandit
