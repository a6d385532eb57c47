#include "stackbandit/reduction.h"

#include <bit>
#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace stackbandit {

std::string mode_name(UtilityMode mode) {
  return mode == UtilityMode::kKnown ? "known" : "unknown-utilities";
}

UtilityMode parse_mode(const std::string& name) {
  if (name == "known") return UtilityMode::kKnown;
  if (name == "unknown-utilities" || name == "unknown") return UtilityMode::kUnknown;
  throw std::invalid_argument("unknown utility mode '" + name + "'");
}

int flat_index(int i, int a_l, int a_f, int j, int num_types, int leader_actions,
               int follower_actions, int context_dim) {
  if (i < 1 || i > num_types || a_l < 1 || a_l > leader_actions || a_f < 1 ||
      a_f > follower_actions || j < 1 || j > context_dim) {
    throw std::invalid_argument("flat_index: index out of range");
  }
  return (i - 1) * (leader_actions * follower_actions * context_dim) +
         (a_l - 1) * (follower_actions * context_dim) + (a_f - 1) * context_dim + j;
}

int embedding_dim(const Game& game) {
  return game.context_dim() * game.follower_types() * game.leader_actions() *
         game.follower_actions();
}

Eigen::VectorXd h_embedding(const PayoffTables& tables, const Context& z,
                            const Eigen::Ref<const Eigen::VectorXd>& x) {
  const int num_types = static_cast<int>(tables.followers.size());
  const int nl = static_cast<int>(tables.leader.rows());
  const int nf = static_cast<int>(tables.leader.cols());
  const int d = z.dim();
  Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(d) * num_types * nl * nf);
  for (int i = 1; i <= num_types; ++i) {
    const int a_f = best_response(tables, x, i - 1) + 1;
    for (int a_l = 1; a_l <= nl; ++a_l) {
      for (int j = 1; j <= d; ++j) {
        h[flat_index(i, a_l, a_f, j, num_types, nl, nf, d) - 1] = z[j - 1] * x[a_l - 1];
      }
    }
  }
  return h;
}

Eigen::VectorXd h_embedding(const Game& game, const Context& z, const MixedStrategy& x) {
  game.check_strategy(x);
  return h_embedding(game.tables(z), z, x.probs());
}

Eigen::VectorXd embedding_parameter(const Game& game, const Eigen::VectorXd& gamma) {
  const int num_types = game.follower_types();
  const int nl = game.leader_actions();
  const int nf = game.follower_actions();
  const int d = game.context_dim();
  if (gamma.size() != num_types) {
    throw std::invalid_argument("embedding_parameter: gamma must have one entry per type");
  }
  Eigen::VectorXd theta(embedding_dim(game));
  for (int i = 1; i <= num_types; ++i) {
    for (int a_l = 1; a_l <= nl; ++a_l) {
      for (int a_f = 1; a_f <= nf; ++a_f) {
        auto form = game.leader_form(a_l - 1, a_f - 1);
        for (int j = 1; j <= d; ++j) {
          theta[flat_index(i, a_l, a_f, j, num_types, nl, nf, d) - 1] = form[j - 1] * gamma[i - 1];
        }
      }
    }
  }
  return theta;
}

Menu build_menu(const Game& game, const Context& z, double delta,
                const GeometryOptions& options) {
  Menu menu;
  menu.points = approximate_extreme_points(game, z, delta, options);
  const PayoffTables tables = game.tables(z);
  menu.utilities.reserve(menu.points.points.size());
  for (const auto& p : menu.points.points) {
    menu.utilities.push_back(utility_values(tables, p.strategy.probs()));
  }
  return menu;
}

std::shared_ptr<const Menu> MenuCache::get(const Context& z) {
  std::vector<std::uint64_t> key(z.dim());
  for (int j = 0; j < z.dim(); ++j) key[j] = std::bit_cast<std::uint64_t>(z[j]);
  auto it = cache_.find(key);
  if (it != cache_.end()) {
    ++hits_;
    return it->second;
  }
  auto menu = std::make_shared<const Menu>(build_menu(game_, z, delta_, options_));
  cache_.emplace(std::move(key), menu);
  return menu;
}

namespace {

RoundActionSet make_action_set(const Game& game, const Context& z,
                               const ExtremePointSet& points,
                               const std::vector<Eigen::VectorXd>* utilities, UtilityMode mode) {
  if (points.points.empty()) {
    throw std::runtime_error("build_action_set: empty strategy menu (degenerate instance)");
  }
  const PayoffTables tables = game.tables(z);
  RoundActionSet set;
  set.mode = mode;
  for (std::size_t i = 0; i < points.points.size(); ++i) {
    const MixedStrategy& x = points.points[i].strategy;
    game.check_strategy(x);
    Eigen::VectorXd u = utilities ? (*utilities)[i] : utility_values(tables, x.probs());
    set.vectors.push_back(mode == UtilityMode::kKnown ? u : h_embedding(tables, z, x.probs()));
    set.utilities.push_back(std::move(u));
    set.strategies.push_back(x);
  }
  return set;
}

}  // namespace

RoundActionSet build_action_set(const Game& game, const Context& z,
                                const ExtremePointSet& menu, UtilityMode mode) {
  return make_action_set(game, z, menu, nullptr, mode);
}

RoundActionSet build_action_set(const Game& game, const Context& z, const Menu& menu,
                                UtilityMode mode) {
  return make_action_set(game, z, menu.points, &menu.utilities, mode);
}

RoundRecord play_round(const Game& game, const Context& z, LinearBandit& engine,
                       const RoundActionSet& actions, int follower_type, Rng& rng,
                       bool verbose) {
  game.check_type(follower_type);
  if (actions.vectors.empty() || actions.vectors.size() != actions.strategies.size()) {
    throw std::invalid_argument("play_round: malformed action set");
  }
  const std::size_t pick = engine.recommend(actions.vectors);
  if (pick >= actions.vectors.size()) {
    throw std::logic_error("play_round: engine returned an action outside the set");
  }
  const MixedStrategy& x = actions.strategies[pick];
  const int a_l = static_cast<int>(rng.categorical(x.probs()));
  const PayoffTables tables = game.tables(z);
  const int a_f = best_response(tables, x.probs(), follower_type);
  const double realized = tables.leader(a_l, a_f);
  engine.observe_utility(actions.vectors[pick], realized);

  RoundRecord rec;
  rec.chosen_index = static_cast<int>(pick);
  rec.sampled_leader_action = a_l;
  rec.follower_type = follower_type;
  rec.follower_action = a_f;
  rec.realized_utility = realized;
  rec.expected_utility = actions.utilities.empty()
                             ? expected_leader_payoff(tables, x.probs(), a_f)
                             : actions.utilities[pick][follower_type];
  double best = -std::numeric_limits<double>::infinity();
  if (actions.utilities.empty()) {
    for (const auto& s : actions.strategies) {
      best = std::max(best, utility_values(tables, s.probs())[follower_type]);
    }
  } else {
    for (const auto& u : actions.utilities) best = std::max(best, u[follower_type]);
  }
  rec.menu_best_utility = best;
  if (verbose) rec.engine_state = engine.snapshot().dump();
  return rec;
}

EpisodeLog run_episode(const Game& game, const Trace& trace, LinearBandit& engine,
                       const EpisodeOptions& options, Rng& rng,
                       const std::vector<std::shared_ptr<const Menu>>* menus) {
  if (options.horizon < 0) throw std::invalid_argument("run_episode: negative horizon");
  const std::size_t horizon = static_cast<std::size_t>(options.horizon);
  if (trace.contexts.size() < horizon || trace.followers.size() < horizon) {
    throw std::invalid_argument("run_episode: trace shorter than the horizon");
  }
  if (menus && menus->size() < horizon) {
    throw std::invalid_argument("run_episode: fewer menus than rounds");
  }
  const double delta = options.delta > 0.0 ? options.delta
                                           : 1.0 / std::max(1, options.horizon);
  MenuCache cache(game, delta, options.geometry);
  EpisodeLog log;
  log.algorithm = engine.name();
  log.mode = mode_name(options.mode);
  log.rounds.reserve(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    const Context& z = trace.contexts[t];
    const std::shared_ptr<const Menu> menu = menus ? (*menus)[t] : cache.get(z);
    const RoundActionSet actions = build_action_set(game, z, *menu, options.mode);
    RoundRecord rec = play_round(game, z, engine, actions, trace.followers[t], rng,
                                 options.verbose);
    rec.t = static_cast<int>(t) + 1;
    log.rounds.push_back(std::move(rec));
  }
  return log;
}

namespace {

std::string fmt_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string csv_quote(const std::string& s) {
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(std::move(cur));
  return fields;
}

constexpr const char* kCsvHeader =
    "t,seed,algorithm,mode,chosen_index,sampled_leader_action,follower_type,"
    "realized_utility,menu_best_utility,expected_utility";

}  // namespace

void write_episode_csv(const EpisodeLog& log, std::ostream& out) {
  const bool verbose = !log.rounds.empty() && !log.rounds.front().engine_state.empty();
  out << kCsvHeader << (verbose ? ",engine_state" : "") << "\n";
  for (const auto& r : log.rounds) {
    out << r.t << ',' << log.seed << ',' << log.algorithm << ',' << log.mode << ','
        << r.chosen_index << ',' << r.sampled_leader_action << ',' << r.follower_type << ','
        << fmt_double(r.realized_utility) << ',' << fmt_double(r.menu_best_utility) << ','
        << fmt_double(r.expected_utility);
    if (verbose) out << ',' << csv_quote(r.engine_state);
    out << "\n";
  }
}

EpisodeLog read_episode_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("episode CSV: missing header");
  const std::vector<std::string> header = split_csv_line(line);
  auto column = [&](const std::string& name) -> int {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return static_cast<int>(i);
    }
    return -1;
  };
  const int c_t = column("t"), c_seed = column("seed"), c_alg = column("algorithm"),
            c_mode = column("mode"), c_idx = column("chosen_index"),
            c_al = column("sampled_leader_action"), c_type = column("follower_type"),
            c_real = column("realized_utility"), c_best = column("menu_best_utility"),
            c_exp = column("expected_utility"), c_state = column("engine_state");
  for (int c : {c_t, c_seed, c_alg, c_mode, c_idx, c_al, c_type, c_real, c_best}) {
    if (c < 0) throw std::runtime_error("episode CSV: header is missing a required column");
  }
  EpisodeLog log;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const std::vector<std::string> f = split_csv_line(line);
    if (f.size() < header.size()) throw std::runtime_error("episode CSV: short row");
    RoundRecord r;
    r.t = std::stoi(f[c_t]);
    r.chosen_index = std::stoi(f[c_idx]);
    r.sampled_leader_action = std::stoi(f[c_al]);
    r.follower_type = std::stoi(f[c_type]);
    r.realized_utility = std::stod(f[c_real]);
    r.menu_best_utility = std::stod(f[c_best]);
    r.expected_utility = c_exp >= 0 ? std::stod(f[c_exp]) : r.realized_utility;
    if (c_state >= 0) r.engine_state = f[c_state];
    log.seed = std::stoull(f[c_seed]);
    log.algorithm = f[c_alg];
    log.mode = f[c_mode];
    log.rounds.push_back(std::move(r));
  }
  return log;
}

}  // namespace stackbandit
