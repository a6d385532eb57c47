#include "stackbandit/harness.h"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <limits>
#include <memory>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace stackbandit {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Per-seed random streams.
constexpr std::uint64_t kGameStream = 1;
constexpr std::uint64_t kPriorStream = 2;
constexpr std::uint64_t kContextStream = 3;
constexpr std::uint64_t kFollowerStream = 4;
constexpr std::uint64_t kSpecStream = 5;

constexpr int kDefaultGridN = 20;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t algorithm_stream(const std::string& tag, std::uint64_t salt) {
  return fnv1a(tag) ^ (salt * 0x9e3779b97f4a7c15ull);
}

std::vector<std::uint64_t> context_key(const Context& z) {
  std::vector<std::uint64_t> key(z.dim());
  for (int j = 0; j < z.dim(); ++j) key[j] = std::bit_cast<std::uint64_t>(z[j]);
  return key;
}

[[noreturn]] void config_error(const std::string& field, const std::string& what) {
  throw std::invalid_argument("config: '" + field + "' " + what);
}

void reject_unknown_keys(const json& j, const std::set<std::string>& allowed,
                         const std::string& where) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!allowed.count(it.key())) {
      config_error(where.empty() ? it.key() : where + "." + it.key(), "is not a recognized field");
    }
  }
}

template <typename T>
T field(const json& j, const char* key, T fallback, const std::string& where) {
  if (!j.contains(key) || j.at(key).is_null()) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    config_error(where.empty() ? key : where + "." + key, "has the wrong type");
  }
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw std::runtime_error("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

std::vector<Eigen::VectorXd> load_context_rows(const fs::path& path) {
  std::vector<Eigen::VectorXd> rows;
  if (path.extension() == ".json") {
    const json j = read_json(path);
    if (!j.is_array()) throw std::runtime_error("'" + path.string() + "': expected an array of contexts");
    for (const auto& r : j) {
      Eigen::VectorXd z(r.size());
      for (std::size_t i = 0; i < r.size(); ++i) z[i] = r[i].get<double>();
      rows.push_back(std::move(z));
    }
    return rows;
  }
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(parse_csv_row(line));
  }
  return rows;
}

std::vector<int> load_follower_rows(const fs::path& path) {
  std::vector<int> rows;
  if (path.extension() == ".json") {
    const json j = read_json(path);
    if (!j.is_array()) throw std::runtime_error("'" + path.string() + "': expected an array of types");
    for (const auto& v : j) rows.push_back(v.get<int>());
    return rows;
  }
  std::istringstream in(read_file(path));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    rows.push_back(std::stoi(line));
  }
  return rows;
}

std::vector<double> cumulative(const std::vector<double>& v) {
  std::vector<double> out(v.size());
  double s = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = (s += v[i]);
  return out;
}

void mean_std(const std::vector<const std::vector<double>*>& series, std::vector<double>* mean,
              std::vector<double>* stdev) {
  const std::size_t n = series.size();
  const std::size_t len = n ? series.front()->size() : 0;
  mean->assign(len, 0.0);
  stdev->assign(len, 0.0);
  for (std::size_t t = 0; t < len; ++t) {
    double m = 0.0;
    for (const auto* s : series) m += (*s)[t];
    m /= static_cast<double>(n);
    double v = 0.0;
    for (const auto* s : series) v += ((*s)[t] - m) * ((*s)[t] - m);
    (*mean)[t] = m;
    (*stdev)[t] = std::sqrt(v / static_cast<double>(n));
  }
}

std::vector<double> cum_realized(const EpisodeLog& log) {
  std::vector<double> u;
  u.reserve(log.rounds.size());
  for (const auto& r : log.rounds) u.push_back(r.realized_utility);
  return cumulative(u);
}

std::unique_ptr<LinearBandit> make_engine(const std::string& tag, int dim, const OfulConfig& oful,
                                          std::uint64_t seed) {
  const bool adv = tag.size() >= 4 && tag.compare(tag.size() - 4, 4, "-adv") == 0;
  if (adv) {
    return std::make_unique<ScaledAdversarialBandit>(
        dim, std::make_unique<ForcedExplorationLoss>(dim, seed));
  }
  return std::make_unique<Oful>(dim, oful);
}

std::vector<double> pseudo_regret_series(const std::vector<double>& best,
                                         const std::vector<double>& chosen) {
  std::vector<double> gap(best.size());
  for (std::size_t t = 0; t < best.size(); ++t) gap[t] = best[t] - chosen[t];
  return cumulative(gap);
}

double prior_best(const std::vector<Eigen::VectorXd>& utilities, const Eigen::VectorXd& prior) {
  double best = -std::numeric_limits<double>::infinity();
  for (const auto& u : utilities) best = std::max(best, u.dot(prior));
  return best;
}

json trace_to_json(const Environment& env, std::size_t horizon) {
  json contexts = json::array();
  for (std::size_t t = 0; t < horizon; ++t) {
    const auto& z = env.trace.contexts[t].z();
    contexts.push_back(std::vector<double>(z.data(), z.data() + z.size()));
  }
  return {{"contexts", contexts},
          {"followers", std::vector<int>(env.trace.followers.begin(),
                                         env.trace.followers.begin() + horizon)},
          {"prior", std::vector<double>(env.prior.data(), env.prior.data() + env.prior.size())},
          {"prior_empirical", env.prior_empirical}};
}

Environment trace_from_json(const json& j) {
  Environment env;
  for (const auto& row : j.at("contexts")) {
    Eigen::VectorXd z(row.size());
    for (std::size_t i = 0; i < row.size(); ++i) z[i] = row[i].get<double>();
    env.trace.contexts.emplace_back(std::move(z));
  }
  env.trace.followers = j.at("followers").get<std::vector<int>>();
  const auto prior = j.at("prior").get<std::vector<double>>();
  env.prior = Eigen::Map<const Eigen::VectorXd>(prior.data(), prior.size());
  env.prior_empirical = j.value("prior_empirical", false);
  if (!env.prior_empirical) env.trace.follower_distribution = env.prior;
  return env;
}

std::string instance_file_name(Setting s, std::uint64_t seed) {
  return (s == Setting::kStackelberg ? "game_seed" : "spec_seed") + std::to_string(seed) + ".json";
}

std::string csv_file_name(const std::string& tag, std::uint64_t seed) {
  return tag + "_seed" + std::to_string(seed) + ".csv";
}

int resolve_grid_n(const ExperimentConfig& config) {
  return config.grid_n > 0 ? config.grid_n : std::min(config.horizon, kDefaultGridN);
}

}  // namespace

std::string setting_name(Setting s) {
  switch (s) {
    case Setting::kStackelberg: return "stackelberg";
    case Setting::kAuction: return "auction";
    case Setting::kPersuasion: return "persuasion";
  }
  return "stackelberg";
}

Setting setting_of_algorithm(const std::string& tag) {
  if (tag == "alg1-oful" || tag == "alg1-adv" || tag == "random" || tag == "etc") {
    return Setting::kStackelberg;
  }
  if (tag == "auction-oful" || tag == "auction-adv") return Setting::kAuction;
  if (tag == "persuasion-oful" || tag == "persuasion-adv") return Setting::kPersuasion;
  throw std::invalid_argument("unknown algorithm '" + tag +
                              "' (expected alg1-oful, alg1-adv, random, etc, auction-oful, "
                              "auction-adv, persuasion-oful or persuasion-adv)");
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> seeds;
  const auto dots = text.find("..");
  try {
    if (dots != std::string::npos) {
      const std::uint64_t lo = std::stoull(text.substr(0, dots));
      const std::uint64_t hi = std::stoull(text.substr(dots + 2));
      if (hi < lo) throw std::invalid_argument("empty range");
      for (std::uint64_t s = lo; s <= hi; ++s) seeds.push_back(s);
    } else {
      std::istringstream in(text);
      std::string item;
      while (std::getline(in, item, ',')) seeds.push_back(std::stoull(item));
    }
  } catch (const std::exception&) {
    throw std::invalid_argument("seeds: cannot parse '" + text + "' (use 0..9 or 1,2,3)");
  }
  if (seeds.empty()) throw std::invalid_argument("seeds: no seeds given");
  return seeds;
}

Eigen::VectorXd parse_csv_row(const std::string& row) {
  std::vector<double> values;
  std::istringstream in(row);
  std::string item;
  while (std::getline(in, item, ',')) {
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(item, &used);
    } catch (const std::exception&) {
      throw std::invalid_argument("cannot parse '" + item + "' as a number");
    }
    if (item.find_first_not_of(" \t\r", used) != std::string::npos) {
      throw std::invalid_argument("cannot parse '" + item + "' as a number");
    }
    values.push_back(v);
  }
  if (values.empty()) throw std::invalid_argument("empty row");
  return Eigen::Map<const Eigen::VectorXd>(values.data(), values.size());
}

ExperimentConfig config_from_json(const json& j, const fs::path& base_dir) {
  if (!j.is_object()) throw std::invalid_argument("config: expected a JSON object");
  reject_unknown_keys(j, {"name", "setting", "algorithms", "algorithm", "mode", "T", "delta", "game",
                          "application", "environment", "engine", "etc", "geometry", "seeds",
                          "verbose", "jobs", "out"},
                      "");
  ExperimentConfig c;
  c.name = field<std::string>(j, "name", c.name, "");
  if (j.contains("algorithms")) {
    c.algorithms = field<std::vector<std::string>>(j, "algorithms", {}, "");
  } else if (j.contains("algorithm")) {
    c.algorithms = {field<std::string>(j, "algorithm", "", "")};
  }
  if (c.algorithms.empty()) config_error("algorithms", "must list at least one algorithm");
  c.setting = setting_of_algorithm(c.algorithms.front());
  if (j.contains("setting")) {
    const auto s = field<std::string>(j, "setting", "", "");
    if (s != setting_name(c.setting)) {
      config_error("setting", "is '" + s + "' but algorithm '" + c.algorithms.front() +
                                  "' belongs to '" + setting_name(c.setting) + "'");
    }
  }
  try {
    c.mode = parse_mode(field<std::string>(j, "mode", "known", ""));
  } catch (const std::invalid_argument&) {
    config_error("mode", "must be 'known' or 'unknown-utilities'");
  }
  c.horizon = field<int>(j, "T", c.horizon, "");
  c.delta = field<double>(j, "delta", 0.0, "");

  const json empty = json::object();
  const json& game = j.contains("game") ? j.at("game") : empty;
  reject_unknown_keys(game, {"d", "K", "A_l", "A_f", "context_dependent_followers", "path"}, "game");
  const json& app = j.contains("application") ? j.at("application") : empty;
  reject_unknown_keys(app, {"d", "K", "items", "signal_dim", "cuts", "path", "grid_n", "grid_cap"},
                      "application");
  if (c.setting == Setting::kStackelberg) {
    c.d = field<int>(game, "d", c.d, "game");
    c.K = field<int>(game, "K", c.K, "game");
    c.leader_actions = field<int>(game, "A_l", c.leader_actions, "game");
    c.follower_actions = field<int>(game, "A_f", c.follower_actions, "game");
    c.context_dependent_followers =
        field<bool>(game, "context_dependent_followers", false, "game");
    if (game.contains("path")) c.game_path = resolve(base_dir, field<std::string>(game, "path", "", "game"));
  } else {
    c.d = field<int>(app, "d", c.d, "application");
    c.K = field<int>(app, "K", 3, "application");
    c.items = field<int>(app, "items", c.items, "application");
    c.signal_dim = field<int>(app, "signal_dim", c.signal_dim, "application");
    c.cuts = field<int>(app, "cuts", c.cuts, "application");
    if (app.contains("path")) c.spec_path = resolve(base_dir, field<std::string>(app, "path", "", "application"));
    c.grid_n = field<int>(app, "grid_n", 0, "application");
    c.grid_cap = field<std::uint64_t>(app, "grid_cap", kDefaultGridCap, "application");
  }

  const json& env = j.contains("environment") ? j.at("environment") : empty;
  reject_unknown_keys(env, {"context_process", "context_file", "context_bias", "follower_process",
                            "follower_file", "follower_distribution"},
                      "environment");
  const auto ctx_process = field<std::string>(env, "context_process",
                                              env.contains("context_file") ? "scripted" : "iid-uniform",
                                              "environment");
  if (ctx_process == "scripted") {
    if (!env.contains("context_file")) config_error("environment.context_file", "is required for scripted contexts");
    c.context_file = resolve(base_dir, field<std::string>(env, "context_file", "", "environment"));
  } else if (ctx_process != "iid-uniform") {
    config_error("environment.context_process", "must be 'iid-uniform' or 'scripted'");
  }
  c.context_bias = field<bool>(env, "context_bias",
                               c.setting != Setting::kStackelberg || !c.context_dependent_followers,
                               "environment");
  const auto fol_process = field<std::string>(env, "follower_process",
                                              env.contains("follower_file") ? "scripted" : "iid",
                                              "environment");
  if (fol_process == "scripted") {
    if (!env.contains("follower_file")) config_error("environment.follower_file", "is required for scripted followers");
    c.follower_file = resolve(base_dir, field<std::string>(env, "follower_file", "", "environment"));
  } else if (fol_process != "iid") {
    config_error("environment.follower_process", "must be 'iid' or 'scripted'");
  }
  if (env.contains("follower_distribution") && !env.at("follower_distribution").is_null()) {
    c.follower_distribution = field<std::vector<double>>(env, "follower_distribution", {}, "environment");
  }

  const json& engine = j.contains("engine") ? j.at("engine") : empty;
  reject_unknown_keys(engine, {"lambda", "noise_scale", "confidence", "theta_bound"}, "engine");
  c.oful.lambda = field<double>(engine, "lambda", c.oful.lambda, "engine");
  c.oful.noise_scale = field<double>(engine, "noise_scale", c.oful.noise_scale, "engine");
  c.oful.confidence = field<double>(engine, "confidence", c.oful.confidence, "engine");
  c.oful.theta_bound = field<double>(engine, "theta_bound", c.oful.theta_bound, "engine");

  const json& etc = j.contains("etc") ? j.at("etc") : empty;
  reject_unknown_keys(etc, {"explore_rounds"}, "etc");
  if (etc.contains("explore_rounds")) {
    const json& e = etc.at("explore_rounds");
    c.etc_explore = e.is_array() ? e.get<std::vector<int>>() : std::vector<int>{e.get<int>()};
  }

  const json& geo = j.contains("geometry") ? j.at("geometry") : empty;
  reject_unknown_keys(geo, {"effective_types", "prune_dominated"}, "geometry");
  c.geometry.use_effective_types = field<bool>(geo, "effective_types", true, "geometry");
  c.geometry.prune_dominated = field<bool>(geo, "prune_dominated", false, "geometry");

  if (j.contains("seeds")) {
    const json& s = j.at("seeds");
    if (s.is_string()) {
      c.seeds = parse_seeds(s.get<std::string>());
    } else if (s.is_array()) {
      c.seeds = s.get<std::vector<std::uint64_t>>();
    } else {
      config_error("seeds", "must be an array or a range string like \"0..9\"");
    }
  }
  c.verbose = field<bool>(j, "verbose", false, "");
  c.jobs = field<int>(j, "jobs", 0, "");
  if (j.contains("out")) c.out_dir = resolve(base_dir, field<std::string>(j, "out", "", ""));
  validate_config(c);
  return c;
}

ExperimentConfig load_config(const fs::path& path) {
  return config_from_json(read_json(path), path.parent_path());
}

void validate_config(const ExperimentConfig& c) {
  if (c.horizon < 1) config_error("T", "must be at least 1");
  if (c.algorithms.empty()) config_error("algorithms", "must list at least one algorithm");
  std::set<std::string> seen;
  for (const auto& tag : c.algorithms) {
    if (setting_of_algorithm(tag) != c.setting) {
      config_error("algorithms", "mixes settings: '" + tag + "' is not a " + setting_name(c.setting) +
                                     " algorithm");
    }
    if (!seen.insert(tag).second) config_error("algorithms", "lists '" + tag + "' twice");
    const bool oful = tag.ends_with("-oful");
    const bool adv = tag.ends_with("-adv");
    if (oful && c.follower_file) {
      config_error("algorithms", "pairs '" + tag + "' with scripted followers; the OFUL instantiation "
                                 "assumes stochastic followers (use the -adv variant)");
    }
    if (adv && c.context_file) {
      config_error("algorithms", "pairs '" + tag + "' with scripted contexts; the scaled adversarial "
                                 "instantiation assumes stochastic contexts (use the -oful variant)");
    }
  }
  if (seen.count("etc")) {
    if (c.context_dependent_followers) {
      config_error("algorithms", "includes 'etc', which needs follower utilities that do not depend "
                                 "on the context; drop it or set game.context_dependent_followers "
                                 "to false");
    }
    if (c.mode == UtilityMode::kUnknown) {
      config_error("algorithms", "includes 'etc', which needs known leader utilities");
    }
    if (c.etc_explore.empty()) config_error("etc.explore_rounds", "must not be empty");
    for (int t0 : c.etc_explore) {
      if (t0 < 0) config_error("etc.explore_rounds", "entries must be non-negative");
    }
    if (!c.context_bias) {
      config_error("environment.context_bias", "must be true when 'etc' runs (its follower utilities "
                                               "are constant only with a fixed first coordinate)");
    }
  }
  if (c.mode == UtilityMode::kUnknown && c.setting != Setting::kStackelberg) {
    config_error("mode", "'unknown-utilities' is only supported for Stackelberg games");
  }
  if (c.d < 1 || c.K < 1) config_error("d/K", "must be positive");
  if (c.K > 64) config_error("K", "must be at most 64");
  if (c.setting == Setting::kStackelberg) {
    if (c.leader_actions < 2 || c.follower_actions < 1) config_error("game", "needs A_l >= 2 and A_f >= 1");
  } else {
    if (c.items < 1 || c.signal_dim < 1 || c.cuts < 0) config_error("application", "sizes must be positive");
    if (c.grid_n < 0) config_error("application.grid_n", "must be positive");
    const std::uint64_t size = simplex_grid_size(c.K, resolve_grid_n(c));
    if (size > c.grid_cap) {
      config_error("application.grid_n", "gives " + std::to_string(size) +
                                             " grid points, above grid_cap " +
                                             std::to_string(c.grid_cap));
    }
  }
  if (!(c.delta >= 0.0) || c.delta >= 1.0) config_error("delta", "must be in (0, 1), or omitted");
  if (c.follower_distribution) {
    const auto& p = *c.follower_distribution;
    if (static_cast<int>(p.size()) != c.K) config_error("environment.follower_distribution", "needs K entries");
    double s = 0.0;
    for (double v : p) {
      if (!(v >= 0.0)) config_error("environment.follower_distribution", "has a negative entry");
      s += v;
    }
    if (std::abs(s - 1.0) > 1e-9) config_error("environment.follower_distribution", "must sum to 1");
  }
  if (c.context_file) {
    const auto rows = load_context_rows(*c.context_file);
    if (rows.size() < static_cast<std::size_t>(c.horizon)) {
      config_error("environment.context_file", "has " + std::to_string(rows.size()) +
                                                   " rows, fewer than T = " + std::to_string(c.horizon));
    }
  }
  if (c.follower_file) {
    const auto rows = load_follower_rows(*c.follower_file);
    if (rows.size() < static_cast<std::size_t>(c.horizon)) {
      config_error("environment.follower_file", "has " + std::to_string(rows.size()) +
                                                    " rows, fewer than T = " + std::to_string(c.horizon));
    }
  }
  if (c.game_path && !fs::exists(*c.game_path)) config_error("game.path", "does not exist");
  if (c.spec_path && !fs::exists(*c.spec_path)) config_error("application.path", "does not exist");
  if (c.seeds.empty()) config_error("seeds", "must not be empty");
  if (std::set<std::uint64_t>(c.seeds.begin(), c.seeds.end()).size() != c.seeds.size()) {
    config_error("seeds", "contains duplicates");
  }
  if (c.jobs < 0) config_error("jobs", "must be non-negative");
}

json config_to_json(const ExperimentConfig& c) {
  json j;
  j["name"] = c.name;
  j["setting"] = setting_name(c.setting);
  j["algorithms"] = c.algorithms;
  j["mode"] = mode_name(c.mode);
  j["T"] = c.horizon;
  j["delta"] = c.delta > 0.0 ? c.delta : 1.0 / c.horizon;
  if (c.setting == Setting::kStackelberg) {
    j["game"] = {{"d", c.d}, {"K", c.K}, {"A_l", c.leader_actions}, {"A_f", c.follower_actions},
                 {"context_dependent_followers", c.context_dependent_followers}};
    if (c.game_path) j["game"]["path"] = c.game_path->string();
  } else {
    j["application"] = {{"d", c.d}, {"K", c.K}, {"items", c.items}, {"signal_dim", c.signal_dim},
                        {"cuts", c.cuts}, {"grid_n", resolve_grid_n(c)}, {"grid_cap", c.grid_cap}};
    if (c.spec_path) j["application"]["path"] = c.spec_path->string();
  }
  json env = {{"context_process", c.context_file ? "scripted" : "iid-uniform"},
              {"context_bias", c.context_bias},
              {"follower_process", c.follower_file ? "scripted" : "iid"}};
  if (c.context_file) env["context_file"] = c.context_file->string();
  if (c.follower_file) env["follower_file"] = c.follower_file->string();
  if (c.follower_distribution) env["follower_distribution"] = *c.follower_distribution;
  j["environment"] = env;
  j["engine"] = {{"lambda", c.oful.lambda}, {"noise_scale", c.oful.noise_scale},
                 {"confidence", c.oful.confidence}, {"theta_bound", c.oful.theta_bound}};
  j["etc"] = {{"explore_rounds", c.etc_explore}};
  j["geometry"] = {{"effective_types", c.geometry.use_effective_types},
                   {"prune_dominated", c.geometry.prune_dominated}};
  j["seeds"] = c.seeds;
  j["verbose"] = c.verbose;
  return j;
}

std::string config_hash(const ExperimentConfig& config) {
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx",
                static_cast<unsigned long long>(fnv1a(config_to_json(config).dump())));
  return buf;
}

Game generate_game(std::uint64_t seed, int d, int K, int leader_actions, int follower_actions,
                   bool context_dependent_followers) {
  if (d < 1 || K < 1 || leader_actions < 2 || follower_actions < 1) {
    throw std::invalid_argument("generate_game: invalid dimensions");
  }
  Rng rng(derive_seed(seed, kGameStream));
  const std::size_t forms = static_cast<std::size_t>(leader_actions) * follower_actions;
  auto draw_tensor = [&](int used) {
    std::vector<double> t(forms * d, 0.0);
    double top = 0.0;
    for (std::size_t f = 0; f < forms; ++f) {
      for (int j = 0; j < used; ++j) {
        t[f * d + j] = rng.uniform(-1.0, 1.0);
        top = std::max(top, std::abs(t[f * d + j]));
      }
    }
    if (top > 0.0) {
      for (double& v : t) v /= used * top;
    }
    return t;
  };
  std::vector<double> leader = draw_tensor(d);
  std::vector<double> followers;
  followers.reserve(forms * d * K);
  for (int k = 0; k < K; ++k) {
    const std::vector<double> t = draw_tensor(context_dependent_followers ? d : 1);
    followers.insert(followers.end(), t.begin(), t.end());
  }
  return Game(d, leader_actions, follower_actions, K, std::move(leader), std::move(followers));
}

MixedStrategy random_baseline(int leader_actions, Rng& rng) {
  if (leader_actions < 1) throw std::invalid_argument("random_baseline: need at least one action");
  return MixedStrategy(rng.dirichlet(leader_actions));
}

Eigen::VectorXd estimate_type_distribution(int num_types,
                                           const std::map<std::uint64_t, int>& observations) {
  Eigen::VectorXd p = Eigen::VectorXd::Constant(num_types, 1.0 / num_types);
  double total = 0.0;
  for (const auto& [mask, count] : observations) {
    if (mask != 0) total += count;
  }
  if (total == 0.0) return p;
  for (int iter = 0; iter < 5000; ++iter) {
    Eigen::VectorXd next = Eigen::VectorXd::Zero(num_types);
    for (const auto& [mask, count] : observations) {
      if (mask == 0) continue;
      double mass = 0.0;
      int members = 0;
      for (int k = 0; k < num_types; ++k) {
        if (mask >> k & 1u) {
          mass += p[k];
          ++members;
        }
      }
      for (int k = 0; k < num_types; ++k) {
        if (!(mask >> k & 1u)) continue;
        next[k] += count * (mass > 0.0 ? p[k] / mass : 1.0 / members);
      }
    }
    next /= total;
    const double change = (next - p).lpNorm<1>();
    p = next;
    if (change < 1e-13) break;
  }
  return p;
}

EtcBaseline::EtcBaseline(int num_types, int explore_rounds)
    : num_types_(num_types), explore_rounds_(explore_rounds) {
  if (num_types < 1 || num_types > 64) throw std::invalid_argument("EtcBaseline: need 1..64 types");
  if (explore_rounds < 0) throw std::invalid_argument("EtcBaseline: negative exploration budget");
}

std::size_t EtcBaseline::choose(const Menu& menu, int t) {
  const std::size_t n = menu.utilities.size();
  if (n == 0) throw std::invalid_argument("EtcBaseline: empty menu");
  if (t < explore_rounds_) return static_cast<std::size_t>(t) % n;
  const Eigen::VectorXd& p = estimate();
  std::size_t best = 0;
  double best_value = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < n; ++i) {
    const double v = menu.utilities[i].dot(p);
    if (v > best_value) {
      best_value = v;
      best = i;
    }
  }
  return best;
}

void EtcBaseline::observe(const PayoffTables& tables, const MixedStrategy& x, int follower_action) {
  std::uint64_t mask = 0;
  for (int k = 0; k < num_types_; ++k) {
    if (best_response(tables, x.probs(), k) == follower_action) mask |= std::uint64_t{1} << k;
  }
  ++observations_[mask];
  stale_ = true;
}

const Eigen::VectorXd& EtcBaseline::estimate() {
  if (stale_) {
    estimate_ = estimate_type_distribution(num_types_, observations_);
    stale_ = false;
  }
  return estimate_;
}

Environment make_environment(const ExperimentConfig& c, int num_types, int context_dim,
                             std::uint64_t seed) {
  const std::size_t horizon = static_cast<std::size_t>(c.horizon);
  Environment env;
  if (c.context_file) {
    const auto rows = load_context_rows(*c.context_file);
    if (rows.size() < horizon) throw std::runtime_error("context file shorter than T");
    for (std::size_t t = 0; t < horizon; ++t) {
      if (rows[t].size() != context_dim) {
        throw std::runtime_error("context file row " + std::to_string(t + 1) + " has " +
                                 std::to_string(rows[t].size()) + " entries, expected " +
                                 std::to_string(context_dim));
      }
      env.trace.contexts.emplace_back(rows[t]);
    }
  } else {
    Rng rng(derive_seed(seed, kContextStream));
    for (std::size_t t = 0; t < horizon; ++t) {
      Eigen::VectorXd z(context_dim);
      for (int j = 0; j < context_dim; ++j) z[j] = rng.uniform(-1.0, 1.0);
      if (c.context_bias) z[0] = 1.0;
      env.trace.contexts.emplace_back(std::move(z));
    }
  }
  if (c.follower_file) {
    const auto rows = load_follower_rows(*c.follower_file);
    if (rows.size() < horizon) throw std::runtime_error("follower file shorter than T");
    env.prior = Eigen::VectorXd::Zero(num_types);
    for (std::size_t t = 0; t < horizon; ++t) {
      if (rows[t] < 0 || rows[t] >= num_types) {
        throw std::runtime_error("follower file row " + std::to_string(t + 1) + ": type " +
                                 std::to_string(rows[t]) + " out of range");
      }
      env.trace.followers.push_back(rows[t]);
      env.prior[rows[t]] += 1.0 / static_cast<double>(horizon);
    }
    env.prior_empirical = true;
  } else {
    if (c.follower_distribution) {
      env.prior = Eigen::Map<const Eigen::VectorXd>(c.follower_distribution->data(), num_types);
    } else {
      Rng prior_rng(derive_seed(seed, kPriorStream));
      env.prior = prior_rng.dirichlet(num_types);
    }
    Rng rng(derive_seed(seed, kFollowerStream));
    for (std::size_t t = 0; t < horizon; ++t) {
      env.trace.followers.push_back(static_cast<int>(rng.categorical(env.prior)));
    }
    env.trace.follower_distribution = env.prior;
  }
  return env;
}

RegretReport hindsight_regret(const EpisodeLog& log, const Trace& trace, const MenuUtilities& menus) {
  const std::size_t horizon = log.rounds.size();
  if (trace.contexts.size() < horizon || trace.followers.size() < horizon) {
    throw std::invalid_argument("hindsight_regret: trace is shorter than the log");
  }
  std::map<std::vector<std::uint64_t>, std::vector<std::size_t>> groups;
  for (std::size_t t = 0; t < horizon; ++t) {
    if (log.rounds[t].follower_type != trace.followers[t]) {
      throw std::invalid_argument("hindsight_regret: log and trace disagree on the follower type at t=" +
                                  std::to_string(t + 1));
    }
    groups[context_key(trace.contexts[t])].push_back(t);
  }
  std::vector<double> comparator(horizon, 0.0);
  for (const auto& [key, rounds] : groups) {
    const std::size_t n = menus(rounds.front()).size();
    std::vector<double> total(n, 0.0);
    for (std::size_t t : rounds) {
      const auto& menu = menus(t);
      if (menu.size() != n) throw std::logic_error("hindsight_regret: menus differ within a context group");
      for (std::size_t i = 0; i < n; ++i) total[i] += menu[i][trace.followers[t]];
    }
    const std::size_t best =
        static_cast<std::size_t>(std::max_element(total.begin(), total.end()) - total.begin());
    for (std::size_t t : rounds) comparator[t] = menus(t)[best][trace.followers[t]];
  }
  std::vector<double> learner(horizon);
  for (std::size_t t = 0; t < horizon; ++t) learner[t] = log.rounds[t].expected_utility;
  RegretReport report;
  report.cum_utility = cumulative(learner);
  report.cum_comparator = cumulative(comparator);
  report.cum_regret.resize(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    report.cum_regret[t] = report.cum_comparator[t] - report.cum_utility[t];
  }
  return report;
}

RegretReport hindsight_regret(const EpisodeLog& log, const Game& game, const Trace& trace,
                              double delta, const GeometryOptions& options) {
  const std::size_t horizon = log.rounds.size();
  if (trace.contexts.size() < horizon) {
    throw std::invalid_argument("hindsight_regret: trace is shorter than the log");
  }
  const double d = delta > 0.0 ? delta : 1.0 / std::max<std::size_t>(1, horizon);
  MenuCache cache(game, d, options);
  std::vector<std::shared_ptr<const Menu>> menus(horizon);
  for (std::size_t t = 0; t < horizon; ++t) menus[t] = cache.get(trace.contexts[t]);
  return hindsight_regret(log, trace, [&](std::size_t t) -> const std::vector<Eigen::VectorXd>& {
    return menus[t]->utilities;
  });
}

namespace {

SeedResult run_stackelberg_seed(const ExperimentConfig& c, std::uint64_t seed) {
  const Game game = c.game_path ? game_from_json(read_json(*c.game_path))
                                : generate_game(seed, c.d, c.K, c.leader_actions, c.follower_actions,
                                                c.context_dependent_followers);
  SeedResult out;
  out.seed = seed;
  out.instance = game_to_json(game);
  out.environment = make_environment(c, game.follower_types(), game.context_dim(), seed);
  const Trace& trace = out.environment.trace;
  const Eigen::VectorXd& prior = out.environment.prior;
  const std::size_t horizon = static_cast<std::size_t>(c.horizon);
  const double delta = c.delta > 0.0 ? c.delta : 1.0 / c.horizon;

  MenuCache cache(game, delta, c.geometry);
  std::vector<std::shared_ptr<const Menu>> menus(horizon);
  std::vector<double> best_prior(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    menus[t] = cache.get(trace.contexts[t]);
    best_prior[t] = prior_best(menus[t]->utilities, prior);
  }
  const MenuUtilities menu_utilities = [&](std::size_t t) -> const std::vector<Eigen::VectorXd>& {
    return menus[t]->utilities;
  };
  const std::string mode = mode_name(c.mode);

  for (const auto& tag : c.algorithms) {
    Rng rng(derive_seed(seed, algorithm_stream(tag, 1)));
    auto finish = [&](AlgorithmRun run, const std::vector<double>& chosen_prior) {
      run.log.algorithm = tag;
      run.log.mode = mode;
      run.log.seed = seed;
      run.log.config_hash = config_hash(c);
      run.regret = hindsight_regret(run.log, trace, menu_utilities);
      run.cum_pseudo_regret = pseudo_regret_series(best_prior, chosen_prior);
      out.runs[tag].push_back(std::move(run));
    };

    if (tag == "alg1-oful" || tag == "alg1-adv") {
      const int dim = c.mode == UtilityMode::kKnown ? game.follower_types() : embedding_dim(game);
      auto engine = make_engine(tag, dim, c.oful, derive_seed(seed, algorithm_stream(tag, 2)));
      EpisodeOptions opts;
      opts.horizon = c.horizon;
      opts.delta = delta;
      opts.mode = c.mode;
      opts.geometry = c.geometry;
      opts.verbose = c.verbose;
      AlgorithmRun run;
      run.log = run_episode(game, trace, *engine, opts, rng, &menus);
      std::vector<double> chosen(horizon);
      for (std::size_t t = 0; t < horizon; ++t) {
        chosen[t] = menus[t]->utilities[run.log.rounds[t].chosen_index].dot(prior);
      }
      finish(std::move(run), chosen);
    } else if (tag == "random") {
      AlgorithmRun run;
      std::vector<double> chosen(horizon);
      for (std::size_t t = 0; t < horizon; ++t) {
        const Context& z = trace.contexts[t];
        const PayoffTables tables = game.tables(z);
        const MixedStrategy x = random_baseline(game.leader_actions(), rng);
        const Eigen::VectorXd u = utility_values(tables, x.probs());
        RoundRecord rec;
        rec.t = static_cast<int>(t) + 1;
        rec.sampled_leader_action = static_cast<int>(rng.categorical(x.probs()));
        rec.follower_type = trace.followers[t];
        rec.follower_action = best_response(tables, x.probs(), rec.follower_type);
        rec.realized_utility = tables.leader(rec.sampled_leader_action, rec.follower_action);
        rec.expected_utility = u[rec.follower_type];
        double best = -std::numeric_limits<double>::infinity();
        for (const auto& v : menus[t]->utilities) best = std::max(best, v[rec.follower_type]);
        rec.menu_best_utility = best;
        chosen[t] = u.dot(prior);
        run.log.rounds.push_back(std::move(rec));
      }
      finish(std::move(run), chosen);
    } else if (tag == "etc") {
      for (int t0 : c.etc_explore) {
        Rng etc_rng(derive_seed(seed, algorithm_stream(tag, 1000 + static_cast<std::uint64_t>(t0))));
        EtcBaseline etc(game.follower_types(), t0);
        AlgorithmRun run;
        run.explore_rounds = t0;
        std::vector<double> chosen(horizon);
        for (std::size_t t = 0; t < horizon; ++t) {
          const Context& z = trace.contexts[t];
          const Menu& menu = *menus[t];
          const PayoffTables tables = game.tables(z);
          const std::size_t idx = etc.choose(menu, static_cast<int>(t));
          const MixedStrategy& x = menu.points.points[idx].strategy;
          RoundRecord rec;
          rec.t = static_cast<int>(t) + 1;
          rec.chosen_index = static_cast<int>(idx);
          rec.sampled_leader_action = static_cast<int>(etc_rng.categorical(x.probs()));
          rec.follower_type = trace.followers[t];
          rec.follower_action = best_response(tables, x.probs(), rec.follower_type);
          rec.realized_utility = tables.leader(rec.sampled_leader_action, rec.follower_action);
          rec.expected_utility = menu.utilities[idx][rec.follower_type];
          double best = -std::numeric_limits<double>::infinity();
          for (const auto& v : menu.utilities) best = std::max(best, v[rec.follower_type]);
          rec.menu_best_utility = best;
          if (static_cast<int>(t) < t0) etc.observe(tables, x, rec.follower_action);
          chosen[t] = menu.utilities[idx].dot(prior);
          run.log.rounds.push_back(std::move(rec));
        }
        finish(std::move(run), chosen);
      }
    }
  }
  return out;
}

template <typename Spec>
SeedResult run_application_seed(const ExperimentConfig& c, std::uint64_t seed, const Spec& spec,
                                 json instance) {
  SeedResult out;
  out.seed = seed;
  out.instance = std::move(instance);
  out.environment = make_environment(c, spec.types(), spec.d, seed);
  const Trace& trace = out.environment.trace;
  const Eigen::VectorXd& prior = out.environment.prior;
  const std::size_t horizon = static_cast<std::size_t>(c.horizon);
  const SimplexGrid grid = simplex_grid(spec.types(), resolve_grid_n(c), c.grid_cap);

  std::map<std::vector<std::uint64_t>, std::shared_ptr<const ApplicationActionSet>> memo;
  std::vector<std::shared_ptr<const ApplicationActionSet>> sets(horizon);
  std::vector<double> best_prior(horizon);
  for (std::size_t t = 0; t < horizon; ++t) {
    auto key = context_key(trace.contexts[t]);
    auto it = memo.find(key);
    if (it == memo.end()) {
      it = memo.emplace(std::move(key), std::make_shared<const ApplicationActionSet>(
                                            application_action_set(spec, trace.contexts[t], grid)))
               .first;
    }
    sets[t] = it->second;
    best_prior[t] = prior_best(sets[t]->utilities, prior);
  }
  const MenuUtilities menu_utilities = [&](std::size_t t) -> const std::vector<Eigen::VectorXd>& {
    return sets[t]->utilities;
  };

  for (const auto& tag : c.algorithms) {
    auto engine = make_engine(tag, spec.types(), c.oful, derive_seed(seed, algorithm_stream(tag, 2)));
    AlgorithmRun run;
    run.log.algorithm = tag;
    run.log.mode = mode_name(c.mode);
    run.log.seed = seed;
    run.log.config_hash = config_hash(c);
    std::vector<double> chosen(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
      const auto& u = sets[t]->utilities;
      const std::size_t idx = engine->recommend(u);
      if (idx >= u.size()) throw std::logic_error("engine returned an action outside the set");
      RoundRecord rec;
      rec.t = static_cast<int>(t) + 1;
      rec.chosen_index = static_cast<int>(idx);
      rec.follower_type = trace.followers[t];
      rec.realized_utility = u[idx][rec.follower_type];
      rec.expected_utility = rec.realized_utility;
      double best = -std::numeric_limits<double>::infinity();
      for (const auto& v : u) best = std::max(best, v[rec.follower_type]);
      rec.menu_best_utility = best;
      engine->observe_utility(u[idx], rec.realized_utility);
      if (c.verbose) rec.engine_state = engine->snapshot().dump();
      chosen[t] = u[idx].dot(prior);
      run.log.rounds.push_back(std::move(rec));
    }
    run.regret = hindsight_regret(run.log, trace, menu_utilities);
    run.cum_pseudo_regret = pseudo_regret_series(best_prior, chosen);
    out.runs[tag].push_back(std::move(run));
  }
  return out;
}

}  // namespace

SeedResult run_seed(const ExperimentConfig& c, std::uint64_t seed) {
  switch (c.setting) {
    case Setting::kStackelberg:
      return run_stackelberg_seed(c, seed);
    case Setting::kAuction: {
      AuctionSpec spec;
      if (c.spec_path) {
        spec = auction_from_json(read_json(*c.spec_path));
      } else {
        Rng rng(derive_seed(seed, kSpecStream));
        spec = generate_auction(rng, c.items, c.d, c.K);
      }
      return run_application_seed(c, seed, spec, auction_to_json(spec));
    }
    case Setting::kPersuasion: {
      PersuasionSpec spec;
      if (c.spec_path) {
        spec = persuasion_from_json(read_json(*c.spec_path));
      } else {
        Rng rng(derive_seed(seed, kSpecStream));
        spec = generate_persuasion(rng, c.signal_dim, c.d, c.K, c.cuts);
      }
      return run_application_seed(c, seed, spec, persuasion_to_json(spec));
    }
  }
  throw std::logic_error("run_seed: unknown setting");
}

double loglog_slope(const std::vector<double>& series, int lo, int hi) {
  if (lo < 1 || hi > static_cast<int>(series.size()) || lo >= hi) {
    throw std::invalid_argument("loglog_slope: bad round range");
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int n = 0;
  for (int t = lo; t <= hi; ++t) {
    const double y = series[t - 1];
    if (!(y > 0.0)) continue;
    const double lx = std::log(static_cast<double>(t));
    const double ly = std::log(y);
    sx += lx;
    sy += ly;
    sxx += lx * lx;
    sxy += lx * ly;
    ++n;
  }
  if (n < 2) return std::numeric_limits<double>::quiet_NaN();
  return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

namespace {

json series_summary(const std::vector<const AlgorithmRun*>& runs) {
  std::vector<std::vector<double>> utility;
  std::vector<const std::vector<double>*> u, r, p;
  utility.reserve(runs.size());
  for (const auto* run : runs) {
    utility.push_back(cum_realized(run->log));
  }
  for (std::size_t s = 0; s < runs.size(); ++s) {
    u.push_back(&utility[s]);
    r.push_back(&runs[s]->regret.cum_regret);
    p.push_back(&runs[s]->cum_pseudo_regret);
  }
  std::vector<double> mean, stdev;
  json j;
  mean_std(u, &mean, &stdev);
  j["mean_cum_utility"] = mean;
  j["std_cum_utility"] = stdev;
  mean_std(r, &mean, &stdev);
  j["mean_cum_regret"] = mean;
  j["std_cum_regret"] = stdev;
  mean_std(p, &mean, &stdev);
  j["mean_cum_pseudo_regret"] = mean;
  j["std_cum_pseudo_regret"] = stdev;
  json finals_u = json::array(), finals_r = json::array(), finals_p = json::array();
  for (std::size_t s = 0; s < runs.size(); ++s) {
    finals_u.push_back(utility[s].empty() ? 0.0 : utility[s].back());
    finals_r.push_back(r[s]->empty() ? 0.0 : r[s]->back());
    finals_p.push_back(p[s]->empty() ? 0.0 : p[s]->back());
  }
  j["final_cum_utility"] = finals_u;
  j["final_cum_regret"] = finals_r;
  j["final_cum_pseudo_regret"] = finals_p;
  return j;
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config,
                                const std::optional<fs::path>& out_dir) {
  validate_config(config);
  ExperimentResult result;
  result.seeds.resize(config.seeds.size());
  {
    const unsigned hw = std::max(1u, std::thread::hardware_concurrency());
    const std::size_t workers = std::min<std::size_t>(
        config.seeds.size(), config.jobs > 0 ? static_cast<std::size_t>(config.jobs) : hw);
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> errors(config.seeds.size());
    auto work = [&] {
      for (std::size_t i; (i = next.fetch_add(1)) < config.seeds.size();) {
        try {
          result.seeds[i] = run_seed(config, config.seeds[i]);
        } catch (...) {
          errors[i] = std::current_exception();
        }
      }
    };
    if (workers <= 1) {
      work();
    } else {
      std::vector<std::thread> pool;
      for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
      for (auto& th : pool) th.join();
    }
    for (const auto& e : errors) {
      if (e) std::rethrow_exception(e);
    }
  }

  json summary;
  summary["name"] = config.name;
  summary["setting"] = setting_name(config.setting);
  summary["mode"] = mode_name(config.mode);
  summary["T"] = config.horizon;
  summary["seeds"] = config.seeds;
  summary["config_hash"] = config_hash(config);
  summary["algorithm_order"] = config.algorithms;
  json algs = json::object();
  for (const auto& tag : config.algorithms) {
    const std::size_t variants = result.seeds.front().runs.at(tag).size();
    std::size_t pick = 0;
    json sweep = json::object();
    if (tag == "etc") {
      double best = -std::numeric_limits<double>::infinity();
      for (std::size_t v = 0; v < variants; ++v) {
        double total = 0.0;
        for (const auto& s : result.seeds) total += cum_realized(s.runs.at(tag)[v].log).back();
        const double mean = total / static_cast<double>(result.seeds.size());
        sweep[std::to_string(result.seeds.front().runs.at(tag)[v].explore_rounds)] = mean;
        if (mean > best) {
          best = mean;
          pick = v;
        }
      }
    }
    std::vector<const AlgorithmRun*> runs;
    for (const auto& s : result.seeds) runs.push_back(&s.runs.at(tag)[pick]);
    json entry = series_summary(runs);
    if (tag == "etc") {
      entry["explore_rounds"] = runs.front()->explore_rounds;
      entry["explore_sweep_mean_final_utility"] = sweep;
      entry["reimplementation"] =
          "explore-then-commit rebuilt from a one-sentence description: cycles the full menu, "
          "then plays greedily against a maximum-likelihood type estimate";
    }
    algs[tag] = entry;
    // Keep only the reported variant so callers see one run per algorithm.
    if (variants > 1) {
      for (auto& s : result.seeds) {
        AlgorithmRun kept = std::move(s.runs.at(tag)[pick]);
        s.runs.at(tag).clear();
        s.runs.at(tag).push_back(std::move(kept));
      }
    }
  }
  summary["algorithms"] = algs;
  result.summary = summary;

  if (out_dir) {
    fs::create_directories(*out_dir);
    write_file(*out_dir / "config.json", config_to_json(config).dump(2) + "\n");
    for (const auto& s : result.seeds) {
      write_file(*out_dir / instance_file_name(config.setting, s.seed), s.instance.dump() + "\n");
      write_file(*out_dir / ("trace_seed" + std::to_string(s.seed) + ".json"),
                 trace_to_json(s.environment, config.horizon).dump() + "\n");
      for (const auto& tag : config.algorithms) {
        std::ostringstream csv;
        write_episode_csv(s.runs.at(tag).front().log, csv);
        write_file(*out_dir / csv_file_name(tag, s.seed), csv.str());
      }
    }
    write_file(*out_dir / "summary.json", summary.dump(2) + "\n");
  }
  return result;
}

json regret_from_logs(const fs::path& dir) {
  const ExperimentConfig config = config_from_json(read_json(dir / "config.json"), dir);
  const double delta = config.delta > 0.0 ? config.delta : 1.0 / config.horizon;
  std::map<std::string, std::vector<RegretReport>> reports;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t seed : config.seeds) {
    const fs::path instance_path = dir / instance_file_name(config.setting, seed);
    const fs::path trace_path = dir / ("trace_seed" + std::to_string(seed) + ".json");
    if (!fs::exists(instance_path) || !fs::exists(trace_path)) continue;
    const json instance = read_json(instance_path);
    const Environment env = trace_from_json(read_json(trace_path));
    const std::size_t horizon = env.trace.contexts.size();

    std::vector<std::vector<Eigen::VectorXd>> menu_utilities(horizon);
    if (config.setting == Setting::kStackelberg) {
      const Game game = game_from_json(instance);
      MenuCache cache(game, delta, config.geometry);
      for (std::size_t t = 0; t < horizon; ++t) {
        menu_utilities[t] = cache.get(env.trace.contexts[t])->utilities;
      }
    } else {
      const SimplexGrid grid = simplex_grid(config.K, resolve_grid_n(config), config.grid_cap);
      std::map<std::vector<std::uint64_t>, std::vector<Eigen::VectorXd>> memo;
      const AuctionSpec auction = config.setting == Setting::kAuction ? auction_from_json(instance)
                                                                      : AuctionSpec{};
      const PersuasionSpec persuasion = config.setting == Setting::kPersuasion
                                            ? persuasion_from_json(instance)
                                            : PersuasionSpec{};
      for (std::size_t t = 0; t < horizon; ++t) {
        const Context& z = env.trace.contexts[t];
        auto key = context_key(z);
        auto it = memo.find(key);
        if (it == memo.end()) {
          auto set = config.setting == Setting::kAuction ? application_action_set(auction, z, grid)
                                                         : application_action_set(persuasion, z, grid);
          it = memo.emplace(std::move(key), std::move(set.utilities)).first;
        }
        menu_utilities[t] = it->second;
      }
    }
    bool any = false;
    for (const auto& tag : config.algorithms) {
      const fs::path csv = dir / csv_file_name(tag, seed);
      if (!fs::exists(csv)) continue;
      std::ifstream in(csv);
      const EpisodeLog log = read_episode_csv(in);
      reports[tag].push_back(hindsight_regret(
          log, env.trace,
          [&](std::size_t t) -> const std::vector<Eigen::VectorXd>& { return menu_utilities[t]; }));
      any = true;
    }
    if (any) seeds.push_back(seed);
  }
  if (seeds.empty()) throw std::runtime_error("no logs found under '" + dir.string() + "'");
  json out;
  out["seeds"] = seeds;
  json algs = json::object();
  for (const auto& [tag, reps] : reports) {
    std::vector<const std::vector<double>*> series;
    json finals = json::array();
    for (const auto& r : reps) {
      series.push_back(&r.cum_regret);
      finals.push_back(r.cum_regret.empty() ? 0.0 : r.cum_regret.back());
    }
    std::vector<double> mean, stdev;
    mean_std(series, &mean, &stdev);
    algs[tag] = {{"final_cum_regret", finals}, {"mean_cum_regret", mean}, {"std_cum_regret", stdev}};
  }
  out["algorithms"] = algs;
  return out;
}

}  // namespace stackbandit
