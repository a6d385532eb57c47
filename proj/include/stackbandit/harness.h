#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "json.hpp"
#include "stackbandit/bandit.h"
#include "stackbandit/game.h"
#include "stackbandit/geometry.h"
#include "stackbandit/markets.h"
#include "stackbandit/reduction.h"
#include "stackbandit/rng.h"

namespace stackbandit {

enum class Setting { kStackelberg, kAuction, kPersuasion };

std::string setting_name(Setting s);

// Which setting an algorithm tag belongs to; throws on unknown tags.
Setting setting_of_algorithm(const std::string& tag);

struct ExperimentConfig {
  std::string name = "experiment";
  Setting setting = Setting::kStackelberg;
  std::vector<std::string> algorithms;
  UtilityMode mode = UtilityMode::kKnown;
  int horizon = 2000;
  double delta = 0.0;  // <= 0 means 1 / horizon

  // Stackelberg instance (generated per seed unless game_path is set).
  int d = 3;
  int K = 5;
  int leader_actions = 3;
  int follower_actions = 3;
  bool context_dependent_followers = false;
  std::optional<std::filesystem::path> game_path;

  // Auction / persuasion instance (generated per seed unless spec_path is set).
  int items = 2;
  int signal_dim = 3;
  int cuts = 2;
  std::optional<std::filesystem::path> spec_path;
  int grid_n = 0;  // 0: min(horizon, 20)
  std::uint64_t grid_cap = kDefaultGridCap;

  // Environment.
  std::optional<std::filesystem::path> context_file;
  bool context_bias = true;  // first context coordinate fixed to 1
  std::optional<std::filesystem::path> follower_file;
  std::optional<std::vector<double>> follower_distribution;

  OfulConfig oful;
  std::vector<int> etc_explore = {25, 50, 100, 200, 400};
  GeometryOptions geometry;
  std::vector<std::uint64_t> seeds = {0, 1, 2, 3, 4, 5, 6, 7, 8, 9};
  bool verbose = false;
  int jobs = 0;  // worker threads over seeds; 0 = hardware concurrency
  std::optional<std::filesystem::path> out_dir;
};

// Parses and validates a config document. Relative file paths are resolved
// against `base_dir`. Throws std::invalid_argument with a message naming the
// offending field.
ExperimentConfig config_from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
ExperimentConfig load_config(const std::filesystem::path& path);
// Resolved config; excludes `jobs` and `out`, which never change results.
nlohmann::json config_to_json(const ExperimentConfig& config);
void validate_config(const ExperimentConfig& config);
// FNV-1a over the canonical dump of config_to_json, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

// "0..9", "3", or "0,2,5".
std::vector<std::uint64_t> parse_seeds(const std::string& text);
// Parses one comma-separated row of numbers.
Eigen::VectorXd parse_csv_row(const std::string& row);

// Uniform [-1, 1] entries rescaled per tensor by 1/(c * max|entry|), where c
// is the number of context coordinates a form may use, so every form has
// L1 norm at most 1. Without context-dependent followers the follower forms
// use only the first coordinate.
Game generate_game(std::uint64_t seed, int d, int K, int leader_actions, int follower_actions,
                   bool context_dependent_followers);

// Uniform draw from the leader's simplex.
MixedStrategy random_baseline(int leader_actions, Rng& rng);

// Explore-then-commit: cycle the menu for `explore_rounds` rounds, estimate
// the type distribution by maximum likelihood from the set of types
// consistent with each observed follower action, then play the menu point
// maximizing expected utility under the estimate.
class EtcBaseline {
 public:
  EtcBaseline(int num_types, int explore_rounds);

  // Menu index to play in round t (0-based).
  std::size_t choose(const Menu& menu, int t);
  void observe(const PayoffTables& tables, const MixedStrategy& x, int follower_action);
  const Eigen::VectorXd& estimate();
  int explore_rounds() const { return explore_rounds_; }

 private:
  int num_types_;
  int explore_rounds_;
  std::map<std::uint64_t, int> observations_;  // consistent-type bitmask -> count
  Eigen::VectorXd estimate_;
  bool stale_ = true;
};

// Maximum-likelihood type distribution from set-valued observations (EM).
Eigen::VectorXd estimate_type_distribution(int num_types,
                                           const std::map<std::uint64_t, int>& observations);

struct Environment {
  Trace trace;
  Eigen::VectorXd prior;        // true type distribution, or empirical frequencies
  bool prior_empirical = false; // true when followers came from a scripted file
};

Environment make_environment(const ExperimentConfig& config, int num_types, int context_dim,
                             std::uint64_t seed);

struct RegretReport {
  std::vector<double> cum_utility;     // learner, expected over the leader's own randomization
  std::vector<double> cum_comparator;  // best fixed menu point per distinct context, in hindsight
  std::vector<double> cum_regret;
};

// Per-round menu utilities: a list of K-vectors for round t.
using MenuUtilities = std::function<const std::vector<Eigen::VectorXd>&(std::size_t t)>;

// Groups rounds by exact context equality and compares against the menu
// point maximizing each group's summed utility.
RegretReport hindsight_regret(const EpisodeLog& log, const Trace& trace,
                              const MenuUtilities& menus);
RegretReport hindsight_regret(const EpisodeLog& log, const Game& game, const Trace& trace,
                              double delta, const GeometryOptions& options = {});

struct AlgorithmRun {
  EpisodeLog log;
  RegretReport regret;
  // Regret against the best menu point for the known type distribution,
  // both evaluated in expectation over the type.
  std::vector<double> cum_pseudo_regret;
  int explore_rounds = 0;  // ETC only
};

struct SeedResult {
  std::uint64_t seed = 0;
  nlohmann::json instance;  // GameSpec / AuctionSpec / PersuasionSpec
  Environment environment;
  std::map<std::string, std::vector<AlgorithmRun>> runs;  // ETC keeps one run per sweep value
};

SeedResult run_seed(const ExperimentConfig& config, std::uint64_t seed);

struct ExperimentResult {
  nlohmann::json summary;
  std::vector<SeedResult> seeds;
};

// Runs every algorithm on every seed and builds the summary. When `out_dir`
// is given, writes config.json, summary.json, one CSV per (algorithm, seed),
// and the instance and trace of each seed.
ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<std::filesystem::path>& out_dir = {});

// Recomputes hindsight regret from an output directory written by
// run_experiment.
nlohmann::json regret_from_logs(const std::filesystem::path& dir);

// Least-squares slope of log(y) against log(t) over rounds lo..hi (1-based,
// inclusive), skipping non-positive y.
double loglog_slope(const std::vector<double>& series, int lo, int hi);

}  // namespace stackbandit
