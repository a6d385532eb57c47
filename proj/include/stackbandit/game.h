#pragma once

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"

namespace stackbandit {

// Follower ties: among actions within this margin of the best expected
// payoff, the smallest index wins.
inline constexpr double kTieTolerance = 1e-9;

// Side information observed by both players. Entries must be finite with
// ||z||_inf <= 1, the domain on which the game's range guard holds.
class Context {
 public:
  explicit Context(Eigen::VectorXd z);

  const Eigen::VectorXd& z() const { return z_; }
  int dim() const { return static_cast<int>(z_.size()); }
  double operator[](int j) const { return z_[j]; }

 private:
  Eigen::VectorXd z_;
};

// A point of the leader's simplex. Construction clamps round-off negatives
// and renormalizes; anything further from the simplex than 1e-6 throws.
class MixedStrategy {
 public:
  explicit MixedStrategy(Eigen::VectorXd x);
  static MixedStrategy pure(int num_actions, int action);
  static MixedStrategy uniform(int num_actions);

  const Eigen::VectorXd& probs() const { return x_; }
  int size() const { return static_cast<int>(x_.size()); }
  double operator[](int a) const { return x_[a]; }

 private:
  Eigen::VectorXd x_;
};

// Leader and follower payoffs evaluated at one context.
struct PayoffTables {
  Eigen::MatrixXd leader;                  // A_l x A_f
  std::vector<Eigen::MatrixXd> followers;  // K tables, each A_l x A_f
};

// A contextual Stackelberg game whose payoffs are linear in the context:
// u(z, a_l, a_f) = <z, U(a_l, a_f)> and u_k(z, a_l, a_f) = <z, U_k(a_l, a_f)>.
// Immutable once built.
class Game {
 public:
  // `leader` holds U flattened as [a_l][a_f][j]; `followers` holds U_k as
  // [k][a_l][a_f][j]. Throws std::invalid_argument on bad sizes, bad
  // dimensions, or any form with sum_j |U[j]| > 1 (which would let
  // |u| exceed 1 somewhere on the unit box of contexts).
  Game(int context_dim, int leader_actions, int follower_actions, int follower_types,
       std::vector<double> leader, std::vector<double> followers);

  int context_dim() const { return d_; }
  int leader_actions() const { return num_leader_; }
  int follower_actions() const { return num_follower_; }
  int follower_types() const { return num_types_; }

  std::span<const double> leader_form(int a_l, int a_f) const;
  std::span<const double> follower_form(int k, int a_l, int a_f) const;
  const std::vector<double>& leader_tensor() const { return leader_; }
  const std::vector<double>& follower_tensor() const { return followers_; }

  double leader_payoff(const Context& z, int a_l, int a_f) const;
  double follower_payoff(const Context& z, int k, int a_l, int a_f) const;
  PayoffTables tables(const Context& z) const;

  void check_context(const Context& z) const;
  void check_strategy(const MixedStrategy& x) const;
  void check_type(int k) const;

 private:
  std::size_t leader_offset(int a_l, int a_f) const;
  std::size_t follower_offset(int k, int a_l, int a_f) const;

  int d_;
  int num_leader_;
  int num_follower_;
  int num_types_;
  std::vector<double> leader_;
  std::vector<double> followers_;
};

// The K-vector of leader payoffs against each follower type, together with
// the strategy that induced it.
struct UtilityVector {
  Eigen::VectorXd values;
  MixedStrategy strategy;
};

int follower_best_response(const Game& game, const Context& z, const MixedStrategy& x, int k);
double leader_expected_utility(const Game& game, const Context& z, const MixedStrategy& x,
                               int a_f);
UtilityVector utility_vector(const Game& game, const Context& z, const MixedStrategy& x);
double realized_round_utility(const Game& game, const Context& z, int a_l, int a_f);

// Table-based forms of the above for callers that evaluate many strategies
// at one context. The Game overloads route through these.
int best_response(const PayoffTables& tables, const Eigen::Ref<const Eigen::VectorXd>& x,
                  int k);
double expected_leader_payoff(const PayoffTables& tables,
                              const Eigen::Ref<const Eigen::VectorXd>& x, int a_f);
Eigen::VectorXd utility_values(const PayoffTables& tables,
                               const Eigen::Ref<const Eigen::VectorXd>& x);
std::vector<int> best_responses(const PayoffTables& tables,
                                const Eigen::Ref<const Eigen::VectorXd>& x);

nlohmann::json game_to_json(const Game& game);
Game game_from_json(const nlohmann::json& doc);

}  // namespace stackbandit
