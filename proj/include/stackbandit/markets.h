#pragma once

#include <cstdint>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "stackbandit/game.h"
#include "stackbandit/rng.h"

namespace stackbandit {

// All omega in the K-simplex with N * omega[i] integer, in lexicographically
// descending order of numerators.
struct SimplexGrid {
  int K = 0;
  int N = 0;
  std::vector<std::vector<int>> numerators;

  std::size_t size() const { return numerators.size(); }
  Eigen::VectorXd point(std::size_t i) const;
};

inline constexpr std::uint64_t kDefaultGridCap = 200000;

class GridTooLarge : public std::runtime_error {
 public:
  GridTooLarge(std::uint64_t count, std::uint64_t cap);
  std::uint64_t count() const { return count_; }

 private:
  std::uint64_t count_;
};

// C(N + K - 1, K - 1), saturating at UINT64_MAX.
std::uint64_t simplex_grid_size(int K, int N);
SimplexGrid simplex_grid(int K, int N, std::uint64_t cap = kDefaultGridCap);

// Second-price bundle auction with additive valuations v_j(z) = <w_j, z>.
struct AuctionSpec {
  int m = 0;  // items
  int d = 0;  // context dimension
  std::vector<Eigen::VectorXd> thresholds;  // K vectors in [0, 1]^m
  std::vector<Eigen::VectorXd> valuations;  // m weight vectors in R^d

  int types() const { return static_cast<int>(thresholds.size()); }
  // Throws std::invalid_argument on bad shapes, thresholds outside [0, 1],
  // or when sum_j (||w_j||_1 + max_i theta_i[j]) > 1, which is the bound
  // that keeps every utility in [-1, 1] on the unit box of contexts.
  void validate() const;
};

Eigen::VectorXd item_values(const AuctionSpec& spec, const Context& z);

struct AuctionOutcome {
  std::vector<int> won;  // 0-based items with b[j] >= theta[j]
  double utility = 0.0;
};

AuctionOutcome auction_outcome(const AuctionSpec& spec, const Context& z,
                               const Eigen::VectorXd& bid, const Eigen::VectorXd& theta);

// sum_i omega[i] u(z, b, theta_i).
double auction_objective(const AuctionSpec& spec, const Context& z, const Eigen::VectorXd& bid,
                         const Eigen::VectorXd& omega);

// Per-item argmax over {0} and the K thresholds of that item; ties go to the
// lowest bid.
Eigen::VectorXd auction_policy_bid(const AuctionSpec& spec, const Context& z,
                                   const Eigen::VectorXd& omega);

// Sender utility z^T C_i mu over the polytope P = {mu : A mu <= c}.
struct PersuasionSpec {
  int p = 0;  // signal-space dimension
  int d = 0;  // context dimension
  Eigen::MatrixXd A;
  Eigen::VectorXd c;
  std::vector<Eigen::MatrixXd> C;  // K matrices, d x p

  int types() const { return static_cast<int>(C.size()); }
  // Shapes, P nonempty and bounded (one LP per signed coordinate), and
  // |z^T C_i mu| <= 1 over P and the unit box (LPs at the box corners).
  void validate() const;
};

double persuasion_utility(const PersuasionSpec& spec, const Context& z, const Eigen::VectorXd& mu,
                          int type);

// LP maximizer of <sum_i omega[i] C_i^T z, mu> over P, solved by the
// Bland's-rule simplex in linprog.h. Throws std::runtime_error when the LP
// is infeasible or unbounded.
Eigen::VectorXd persuasion_policy_signal(const PersuasionSpec& spec, const Context& z,
                                         const Eigen::VectorXd& omega);

// Distinct policy actions (bid vectors or signals) over a grid, each with
// its K-vector of utilities. grid_points[i] lists the grid indices that map
// to action i; action_of[g] is the action index of grid point g.
struct ApplicationActionSet {
  std::vector<Eigen::VectorXd> actions;
  std::vector<Eigen::VectorXd> utilities;
  std::vector<std::vector<int>> grid_points;
  std::vector<int> action_of;
};

ApplicationActionSet application_action_set(const AuctionSpec& spec, const Context& z,
                                            const SimplexGrid& grid);
ApplicationActionSet application_action_set(const PersuasionSpec& spec, const Context& z,
                                            const SimplexGrid& grid);

nlohmann::json auction_to_json(const AuctionSpec& spec);
AuctionSpec auction_from_json(const nlohmann::json& j);
nlohmann::json persuasion_to_json(const PersuasionSpec& spec);
PersuasionSpec persuasion_from_json(const nlohmann::json& j);

// Random instances that pass validate(). Auctions: thresholds uniform on
// [0, 1/(2m)], valuation weights with ||w_j||_1 <= 1/(2m). Persuasion: the
// corner simplex {mu >= 0, sum mu <= 1} cut by `cuts` random halfspaces
// through a slack of 0.1 around its barycenter, with each C_i scaled so the
// largest column L1 norm is at most 1.
AuctionSpec generate_auction(Rng& rng, int m, int d, int K);
PersuasionSpec generate_persuasion(Rng& rng, int p, int d, int K, int cuts = 2);

}  // namespace stackbandit
