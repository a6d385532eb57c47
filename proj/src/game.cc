#include "stackbandit/game.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace stackbandit {
namespace {

constexpr double kRangeSlack = 1e-12;

void require(bool ok, const std::string& what) {
  if (!ok) throw std::invalid_argument(what);
}

}  // namespace

Context::Context(Eigen::VectorXd z) : z_(std::move(z)) {
  require(z_.size() >= 1, "Context: empty vector");
  for (Eigen::Index j = 0; j < z_.size(); ++j) {
    require(std::isfinite(z_[j]), "Context: non-finite entry");
    require(std::abs(z_[j]) <= 1.0 + kRangeSlack, "Context: entry outside [-1, 1]");
  }
}

MixedStrategy::MixedStrategy(Eigen::VectorXd x) : x_(std::move(x)) {
  require(x_.size() >= 1, "MixedStrategy: empty vector");
  for (Eigen::Index a = 0; a < x_.size(); ++a) {
    require(std::isfinite(x_[a]), "MixedStrategy: non-finite entry");
    require(x_[a] >= -1e-9, "MixedStrategy: negative probability");
    if (x_[a] < 0.0) x_[a] = 0.0;
  }
  const double total = x_.sum();
  require(std::abs(total - 1.0) <= 1e-6, "MixedStrategy: probabilities do not sum to 1");
  if (total != 1.0) x_ /= total;
}

MixedStrategy MixedStrategy::pure(int num_actions, int action) {
  require(action >= 0 && action < num_actions, "MixedStrategy::pure: action out of range");
  Eigen::VectorXd x = Eigen::VectorXd::Zero(num_actions);
  x[action] = 1.0;
  return MixedStrategy(std::move(x));
}

MixedStrategy MixedStrategy::uniform(int num_actions) {
  require(num_actions >= 1, "MixedStrategy::uniform: no actions");
  return MixedStrategy(Eigen::VectorXd::Constant(num_actions, 1.0 / num_actions));
}

Game::Game(int context_dim, int leader_actions, int follower_actions, int follower_types,
           std::vector<double> leader, std::vector<double> followers)
    : d_(context_dim),
      num_leader_(leader_actions),
      num_follower_(follower_actions),
      num_types_(follower_types),
      leader_(std::move(leader)),
      followers_(std::move(followers)) {
  require(d_ >= 1, "Game: context dimension must be >= 1");
  require(num_leader_ >= 2, "Game: leader needs at least 2 actions");
  require(num_follower_ >= 1, "Game: follower needs at least 1 action");
  require(num_types_ >= 1, "Game: need at least one follower type");
  const std::size_t form_count = static_cast<std::size_t>(num_leader_) * num_follower_;
  require(leader_.size() == form_count * d_, "Game: leader tensor has wrong size");
  require(followers_.size() == form_count * d_ * num_types_,
          "Game: follower tensor has wrong size");

  auto check_form = [&](std::span<const double> form, const char* who) {
    double l1 = 0.0;
    for (double c : form) {
      require(std::isfinite(c), std::string("Game: non-finite ") + who + " coefficient");
      l1 += std::abs(c);
    }
    require(l1 <= 1.0 + kRangeSlack,
            std::string("Game: ") + who + " utility can leave [-1, 1] on the context box");
  };
  for (int a_l = 0; a_l < num_leader_; ++a_l) {
    for (int a_f = 0; a_f < num_follower_; ++a_f) {
      check_form(leader_form(a_l, a_f), "leader");
      for (int k = 0; k < num_types_; ++k) check_form(follower_form(k, a_l, a_f), "follower");
    }
  }
}

std::size_t Game::leader_offset(int a_l, int a_f) const {
  return (static_cast<std::size_t>(a_l) * num_follower_ + a_f) * d_;
}

std::size_t Game::follower_offset(int k, int a_l, int a_f) const {
  return ((static_cast<std::size_t>(k) * num_leader_ + a_l) * num_follower_ + a_f) * d_;
}

std::span<const double> Game::leader_form(int a_l, int a_f) const {
  return {leader_.data() + leader_offset(a_l, a_f), static_cast<std::size_t>(d_)};
}

std::span<const double> Game::follower_form(int k, int a_l, int a_f) const {
  return {followers_.data() + follower_offset(k, a_l, a_f), static_cast<std::size_t>(d_)};
}

void Game::check_context(const Context& z) const {
  require(z.dim() == d_, "context has wrong dimension");
}

void Game::check_strategy(const MixedStrategy& x) const {
  require(x.size() == num_leader_, "mixed strategy has wrong dimension");
}

void Game::check_type(int k) const {
  require(k >= 0 && k < num_types_, "follower type out of range");
}

namespace {

double dot(std::span<const double> form, const Context& z) {
  double s = 0.0;
  for (std::size_t j = 0; j < form.size(); ++j) s += form[j] * z[static_cast<int>(j)];
  return s;
}

}  // namespace

double Game::leader_payoff(const Context& z, int a_l, int a_f) const {
  check_context(z);
  require(a_l >= 0 && a_l < num_leader_, "leader action out of range");
  require(a_f >= 0 && a_f < num_follower_, "follower action out of range");
  return dot(leader_form(a_l, a_f), z);
}

double Game::follower_payoff(const Context& z, int k, int a_l, int a_f) const {
  check_context(z);
  check_type(k);
  require(a_l >= 0 && a_l < num_leader_, "leader action out of range");
  require(a_f >= 0 && a_f < num_follower_, "follower action out of range");
  return dot(follower_form(k, a_l, a_f), z);
}

PayoffTables Game::tables(const Context& z) const {
  check_context(z);
  PayoffTables t;
  t.leader.resize(num_leader_, num_follower_);
  t.followers.assign(num_types_, Eigen::MatrixXd(num_leader_, num_follower_));
  for (int a_l = 0; a_l < num_leader_; ++a_l) {
    for (int a_f = 0; a_f < num_follower_; ++a_f) {
      t.leader(a_l, a_f) = dot(leader_form(a_l, a_f), z);
      for (int k = 0; k < num_types_; ++k) {
        t.followers[k](a_l, a_f) = dot(follower_form(k, a_l, a_f), z);
      }
    }
  }
  return t;
}

int best_response(const PayoffTables& tables, const Eigen::Ref<const Eigen::VectorXd>& x,
                  int k) {
  const Eigen::MatrixXd& f = tables.followers[k];
  const Eigen::Index n = f.cols();
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index a = 0; a < n; ++a) best = std::max(best, f.col(a).dot(x));
  for (Eigen::Index a = 0; a < n; ++a) {
    if (f.col(a).dot(x) >= best - kTieTolerance) return static_cast<int>(a);
  }
  return 0;  // unreachable for finite payoffs
}

std::vector<int> best_responses(const PayoffTables& tables,
                                const Eigen::Ref<const Eigen::VectorXd>& x) {
  std::vector<int> out(tables.followers.size());
  for (std::size_t k = 0; k < out.size(); ++k) out[k] = best_response(tables, x, static_cast<int>(k));
  return out;
}

double expected_leader_payoff(const PayoffTables& tables,
                              const Eigen::Ref<const Eigen::VectorXd>& x, int a_f) {
  return tables.leader.col(a_f).dot(x);
}

Eigen::VectorXd utility_values(const PayoffTables& tables,
                               const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int num_types = static_cast<int>(tables.followers.size());
  Eigen::VectorXd v(num_types);
  for (int k = 0; k < num_types; ++k) {
    v[k] = expected_leader_payoff(tables, x, best_response(tables, x, k));
  }
  return v;
}

int follower_best_response(const Game& game, const Context& z, const MixedStrategy& x, int k) {
  game.check_type(k);
  game.check_strategy(x);
  return best_response(game.tables(z), x.probs(), k);
}

double leader_expected_utility(const Game& game, const Context& z, const MixedStrategy& x,
                               int a_f) {
  game.check_strategy(x);
  require(a_f >= 0 && a_f < game.follower_actions(), "follower action out of range");
  return expected_leader_payoff(game.tables(z), x.probs(), a_f);
}

UtilityVector utility_vector(const Game& game, const Context& z, const MixedStrategy& x) {
  game.check_strategy(x);
  return {utility_values(game.tables(z), x.probs()), x};
}

double realized_round_utility(const Game& game, const Context& z, int a_l, int a_f) {
  return game.leader_payoff(z, a_l, a_f);
}

nlohmann::json game_to_json(const Game& game) {
  const int d = game.context_dim();
  const int nl = game.leader_actions();
  const int nf = game.follower_actions();
  const int nk = game.follower_types();
  nlohmann::json leader = nlohmann::json::array();
  for (int a_l = 0; a_l < nl; ++a_l) {
    nlohmann::json row = nlohmann::json::array();
    for (int a_f = 0; a_f < nf; ++a_f) {
      auto form = game.leader_form(a_l, a_f);
      row.push_back(std::vector<double>(form.begin(), form.end()));
    }
    leader.push_back(std::move(row));
  }
  nlohmann::json followers = nlohmann::json::array();
  for (int k = 0; k < nk; ++k) {
    nlohmann::json type = nlohmann::json::array();
    for (int a_l = 0; a_l < nl; ++a_l) {
      nlohmann::json row = nlohmann::json::array();
      for (int a_f = 0; a_f < nf; ++a_f) {
        auto form = game.follower_form(k, a_l, a_f);
        row.push_back(std::vector<double>(form.begin(), form.end()));
      }
      type.push_back(std::move(row));
    }
    followers.push_back(std::move(type));
  }
  return {{"d", d}, {"A_l", nl}, {"A_f", nf}, {"K", nk},
          {"leader", std::move(leader)}, {"followers", std::move(followers)}};
}

Game game_from_json(const nlohmann::json& doc) {
  const int d = doc.at("d").get<int>();
  const int nl = doc.at("A_l").get<int>();
  const int nf = doc.at("A_f").get<int>();
  const int nk = doc.at("K").get<int>();
  require(d >= 1 && nl >= 1 && nf >= 1 && nk >= 1, "game JSON: dimensions must be positive");
  std::vector<double> leader;
  const auto& lt = doc.at("leader");
  require(lt.size() == static_cast<std::size_t>(nl), "game JSON: leader has wrong A_l extent");
  for (const auto& row : lt) {
    require(row.size() == static_cast<std::size_t>(nf), "game JSON: leader has wrong A_f extent");
    for (const auto& form : row) {
      require(form.size() == static_cast<std::size_t>(d), "game JSON: leader form has wrong d");
      for (const auto& c : form) leader.push_back(c.get<double>());
    }
  }
  std::vector<double> followers;
  const auto& ft = doc.at("followers");
  require(ft.size() == static_cast<std::size_t>(nk), "game JSON: followers has wrong K extent");
  for (const auto& type : ft) {
    require(type.size() == static_cast<std::size_t>(nl), "game JSON: follower has wrong A_l extent");
    for (const auto& row : type) {
      require(row.size() == static_cast<std::size_t>(nf),
              "game JSON: follower has wrong A_f extent");
      for (const auto& form : row) {
        require(form.size() == static_cast<std::size_t>(d),
                "game JSON: follower form has wrong d");
        for (const auto& c : form) followers.push_back(c.get<double>());
      }
    }
  }
  return Game(d, nl, nf, nk, std::move(leader), std::move(followers));
}

}  // namespace stackbandit
