#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "stackbandit/bandit.h"
#include "stackbandit/game.h"
#include "stackbandit/geometry.h"
#include "stackbandit/rng.h"

namespace stackbandit {

enum class UtilityMode { kKnown, kUnknown };

std::string mode_name(UtilityMode mode);
UtilityMode parse_mode(const std::string& name);

// 1-based position of (type i, leader action a_l, follower action a_f,
// context coordinate j) in the flattened d*K*A_l*A_f embedding:
//   (i-1) A_l A_f d + (a_l-1) A_f d + (a_f-1) d + j.
// All arguments are 1-based; out-of-range indices throw.
int flat_index(int i, int a_l, int a_f, int j, int num_types, int leader_actions,
               int follower_actions, int context_dim);

int embedding_dim(const Game& game);

// h(z, x)[n(i, a_l, a_f, j)] = z[j] x[a_l] 1{a_f = b_i(z, x)}, zero elsewhere.
Eigen::VectorXd h_embedding(const Game& game, const Context& z, const MixedStrategy& x);
Eigen::VectorXd h_embedding(const PayoffTables& tables, const Context& z,
                            const Eigen::Ref<const Eigen::VectorXd>& x);

// theta(gamma)[n(i, a_l, a_f, j)] = U(a_l, a_f)[j] gamma[i]; with it,
// <h(z, x), theta(gamma)> is the leader's expected payoff when the follower
// type is drawn from gamma.
Eigen::VectorXd embedding_parameter(const Game& game, const Eigen::VectorXd& gamma);

// Strategy menu for one context with each point's K-vector of utilities.
struct Menu {
  ExtremePointSet points;
  std::vector<Eigen::VectorXd> utilities;
};

Menu build_menu(const Game& game, const Context& z, double delta,
                const GeometryOptions& options = {});

// Menus memoized on bitwise-equal contexts.
class MenuCache {
 public:
  MenuCache(const Game& game, double delta, GeometryOptions options = {})
      : game_(game), delta_(delta), options_(options) {}

  std::shared_ptr<const Menu> get(const Context& z);
  std::size_t size() const { return cache_.size(); }
  std::size_t hits() const { return hits_; }

 private:
  const Game& game_;
  double delta_;
  GeometryOptions options_;
  std::map<std::vector<std::uint64_t>, std::shared_ptr<const Menu>> cache_;
  std::size_t hits_ = 0;
};

// The per-round action set handed to a bandit engine. `vectors[i]` is the
// utility vector (known mode) or the h-embedding (unknown mode) of
// `strategies[i]`; `utilities[i]` is always the K-vector of leader payoffs.
struct RoundActionSet {
  UtilityMode mode = UtilityMode::kKnown;
  std::vector<Eigen::VectorXd> vectors;
  std::vector<MixedStrategy> strategies;
  std::vector<Eigen::VectorXd> utilities;
};

RoundActionSet build_action_set(const Game& game, const Context& z,
                                const ExtremePointSet& menu, UtilityMode mode);
RoundActionSet build_action_set(const Game& game, const Context& z, const Menu& menu,
                                UtilityMode mode);

struct RoundRecord {
  int t = 0;                    // 1-based round number
  int chosen_index = -1;        // menu index, -1 for off-menu strategies
  int sampled_leader_action = -1;
  int follower_type = 0;
  int follower_action = -1;
  double realized_utility = 0.0;
  double expected_utility = 0.0;  // payoff of the committed strategy against the served type
  double menu_best_utility = 0.0;
  std::string engine_state;       // compact JSON when verbose logging is on
};

struct EpisodeLog {
  std::string algorithm;
  std::string mode = "known";
  std::uint64_t seed = 0;
  std::string config_hash;
  std::vector<RoundRecord> rounds;
};

// One round: recommend, commit to the strategy behind the chosen vector,
// sample the leader action, let the served follower type best-respond to the
// committed mixed strategy, and feed the sampled-action payoff back.
RoundRecord play_round(const Game& game, const Context& z, LinearBandit& engine,
                       const RoundActionSet& actions, int follower_type, Rng& rng,
                       bool verbose = false);

// Contexts and follower types for each round, plus the type distribution
// when followers are stochastic.
struct Trace {
  std::vector<Context> contexts;
  std::vector<int> followers;
  std::optional<Eigen::VectorXd> follower_distribution;
};

struct EpisodeOptions {
  int horizon = 0;
  double delta = 0.0;  // <= 0 means 1 / horizon
  UtilityMode mode = UtilityMode::kKnown;
  GeometryOptions geometry;
  bool verbose = false;
};

// Runs the reduction for `options.horizon` rounds of `trace`. Menus come
// from `menus` when given (one per round), otherwise from a local cache.
EpisodeLog run_episode(const Game& game, const Trace& trace, LinearBandit& engine,
                       const EpisodeOptions& options, Rng& rng,
                       const std::vector<std::shared_ptr<const Menu>>* menus = nullptr);

void write_episode_csv(const EpisodeLog& log, std::ostream& out);
EpisodeLog read_episode_csv(std::istream& in);

}  // namespace stackbandit
