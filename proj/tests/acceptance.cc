// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
//
//   acceptance <configs-dir> [work-dir]

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "stackbandit/bandit.h"
#include "stackbandit/geometry.h"
#include "stackbandit/harness.h"
#include "stackbandit/markets.h"
#include "stackbandit/reduction.h"
#include "test_util.h"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace stackbandit;

namespace {

int failures = 0;

void report(int id, bool ok, const std::string& detail, double seconds) {
  std::printf("criterion %2d: %s  %s  [%.1fs]\n", id, ok ? "PASS" : "FAIL", detail.c_str(), seconds);
  std::fflush(stdout);
  if (!ok) ++failures;
}

template <typename F>
void run(int id, F&& body) {
  const auto start = std::chrono::steady_clock::now();
  bool ok = false;
  std::string detail;
  try {
    ok = body(detail);
  } catch (const std::exception& e) {
    detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  report(id, ok, detail, secs);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), f, a);
  return buf;
}

double back(const json& summary, const std::string& tag, const std::string& key) {
  return summary.at("algorithms").at(tag).at(key).back().get<double>();
}

std::vector<double> series(const json& summary, const std::string& tag, const std::string& key) {
  return summary.at("algorithms").at(tag).at(key).get<std::vector<double>>();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Empty string when every file matches, else the first differing name.
std::string compare_dirs(const fs::path& a, const fs::path& b) {
  std::size_t n = 0;
  for (const auto& e : fs::directory_iterator(a)) {
    const fs::path other = b / e.path().filename();
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) return e.path().filename().string();
    ++n;
  }
  for (const auto& e : fs::directory_iterator(b)) {
    if (!fs::exists(a / e.path().filename())) return e.path().filename().string();
  }
  return n == 0 ? "<empty>" : "";
}

bool linearization(std::string& detail) {
  Rng rng(101);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(5));
    const int K = 1 + static_cast<int>(rng.index(5));
    const int nl = 2 + static_cast<int>(rng.index(4));
    const int nf = 1 + static_cast<int>(rng.index(5));
    const Game g = testing::random_game(rng, d, K, nl, nf);
    const Context z = testing::random_context(rng, d);
    const MixedStrategy x(rng.dirichlet(nl));
    const int k = static_cast<int>(rng.index(K));
    const double direct = leader_expected_utility(g, z, x, follower_best_response(g, z, x, k));
    const double linear = utility_vector(g, z, x).values.dot(Eigen::VectorXd::Unit(K, k));
    worst = std::max(worst, std::abs(direct - linear));
    // Independent evaluation straight from the stored forms.
    worst = std::max(worst, std::abs(testing::oracle_payoff(g, z, x.probs(), k) - linear));
  }
  detail = "1000 instances, max gap " + fmt("%.3g", worst) + " (tol 1e-12)";
  return worst <= 1e-12;
}

bool embedding(std::string& detail) {
  Rng rng(202);
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const int d = 1 + static_cast<int>(rng.index(3));
    const int K = 1 + static_cast<int>(rng.index(3));
    const int nl = 2 + static_cast<int>(rng.index(2));
    const int nf = 1 + static_cast<int>(rng.index(3));
    const Game g = testing::random_game(rng, d, K, nl, nf);
    const Context z = testing::random_context(rng, d);
    const Eigen::VectorXd x = rng.dirichlet(nl);
    const Eigen::VectorXd gamma = rng.dirichlet(K);
    double expected = 0.0;
    for (int k = 0; k < K; ++k) expected += gamma[k] * testing::oracle_payoff(g, z, x, k);
    const double inner = h_embedding(g, z, MixedStrategy(x)).dot(embedding_parameter(g, gamma));
    worst = std::max(worst, std::abs(inner - expected));
  }
  detail = "200 instances, max gap " + fmt("%.3g", worst) + " (tol 1e-9)";
  return worst <= 1e-9;
}

bool near_optimality(std::string& detail) {
  Rng rng(303);
  const double delta = 1e-3;
  double worst = -1e9;  // largest (sample best - menu best)
  for (int trial = 0; trial < 50; ++trial) {
    const Game g = testing::random_game(rng, 3, 3, 3, 3);
    const Context z = testing::random_context(rng, 3);
    const Eigen::VectorXd gamma = rng.dirichlet(3);
    const PayoffTables tables = g.tables(z);
    auto value = [&](const Eigen::VectorXd& x) { return utility_values(tables, x).dot(gamma); };
    const ExtremePointSet menu = approximate_extreme_points(g, z, delta);
    double menu_best = -1e9;
    for (const auto& p : menu.points) menu_best = std::max(menu_best, value(p.strategy.probs()));
    double sample_best = -1e9;
    for (int s = 0; s < 100000; ++s) sample_best = std::max(sample_best, value(rng.dirichlet(3)));
    worst = std::max(worst, sample_best - menu_best);
  }
  detail = "50 games, worst shortfall " + fmt("%.3g", worst) + " (allowed 1.000001e-3)";
  return worst <= delta + 1e-6;
}

// Fraction of trials whose confidence set holds theta* through every round.
int coverage_trials(double noise_scale, double lambda, std::uint64_t seed) {
  Rng rng(seed);
  int covered = 0;
  for (int trial = 0; trial < 100; ++trial) {
    OfulConfig c;
    c.noise_scale = noise_scale;
    c.lambda = lambda;
    Oful oful(3, c);
    Eigen::VectorXd theta(3);
    for (int i = 0; i < 3; ++i) theta[i] = rng.normal();
    theta *= rng.uniform() / theta.norm();
    bool ok = oful.confidence_contains(theta);
    for (int t = 0; t < 200 && ok; ++t) {
      std::vector<Eigen::VectorXd> actions(10, Eigen::VectorXd(3));
      for (auto& a : actions) {
        for (int i = 0; i < 3; ++i) a[i] = rng.normal();
        a /= a.norm();
      }
      const Eigen::VectorXd& v = actions[oful.recommend(actions)];
      oful.observe_utility(v, v.dot(theta) + rng.uniform(-noise_scale, noise_scale));
      ok = oful.confidence_contains(theta);
    }
    covered += ok;
  }
  return covered;
}

bool oful_coverage(std::string& detail) {
  const OfulConfig defaults;
  const int at_default = coverage_trials(defaults.noise_scale, defaults.lambda, 404);
  // Constants used by the shipped experiment configs.
  const int at_tuned = coverage_trials(0.05, 0.1, 405);
  detail = "covered " + std::to_string(at_default) + "/100 at R=4, lambda=1; " +
           std::to_string(at_tuned) + "/100 at R=0.05, lambda=0.1 (need 85)";
  return at_default >= 85 && at_tuned >= 85;
}

// Records everything the wrapper forwards to the inner engine.
class Tap final : public LinearLossMinimizer {
 public:
  explicit Tap(std::uint64_t seed, int dim) : inner_(dim, seed) {}
  std::size_t recommend(std::span<const Eigen::VectorXd> actions) override {
    for (const auto& a : actions) max_norm = std::max(max_norm, a.norm());
    return inner_.recommend(actions);
  }
  void observe_loss(const Eigen::VectorXd& chosen, double loss) override {
    last_loss = loss;
    inner_.observe_loss(chosen, loss);
  }
  std::string name() const override { return "tap"; }

  double max_norm = 0.0;
  double last_loss = 0.0;

 private:
  ForcedExplorationLoss inner_;
};

bool wrapper_contract(std::string& detail) {
  Rng rng(707);
  int bad_loss = 0, bad_index = 0;
  double max_norm = 0.0;
  for (int K = 1; K <= 8; ++K) {
    auto tap = std::make_unique<Tap>(K, K);
    Tap* t = tap.get();
    ScaledAdversarialBandit wrapper(K, std::move(tap));
    for (int trial = 0; trial < 1250; ++trial) {
      std::vector<Eigen::VectorXd> actions(1 + rng.index(12), Eigen::VectorXd(K));
      for (auto& a : actions) {
        for (int i = 0; i < K; ++i) a[i] = rng.uniform(-1, 1);
        if (rng.uniform() < 0.1) a = Eigen::VectorXd::Ones(K);  // the extreme corner
      }
      const std::size_t pick = wrapper.recommend(actions);
      if (pick >= actions.size()) {
        ++bad_index;
        continue;
      }
      const double u = rng.uniform(-1, 1);
      wrapper.observe_utility(actions[pick], u);
      if (t->last_loss != -u / std::sqrt(static_cast<double>(K))) ++bad_loss;
    }
    max_norm = std::max(max_norm, t->max_norm);
  }
  detail = "10000 action sets, max forwarded norm " + fmt("%.17g", max_norm) + ", loss mismatches " +
           std::to_string(bad_loss) + ", bad indices " + std::to_string(bad_index);
  return max_norm <= 1.0 + 1e-12 && bad_loss == 0 && bad_index == 0;
}

bool policy_exactness(std::string& detail) {
  Rng rng(808);
  int auction_mismatch = 0, beaten = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int m = 1 + static_cast<int>(rng.index(3));
    const int K = 1 + static_cast<int>(rng.index(4));
    const AuctionSpec s = generate_auction(rng, m, 3, K);
    const Context z = testing::random_context(rng, 3);
    const Eigen::VectorXd omega = rng.dirichlet(K);
    const Eigen::VectorXd bid = auction_policy_bid(s, z, omega);
    if (bid != testing::exhaustive_bid(s, z, omega)) ++auction_mismatch;
    const double value = auction_objective(s, z, bid, omega);
    double sampled = -1e9;
    for (int r = 0; r < 10000; ++r) {
      Eigen::VectorXd b(m);
      for (int j = 0; j < m; ++j) b[j] = rng.uniform();
      sampled = std::max(sampled, auction_objective(s, z, b, omega));
    }
    if (value < sampled - 1e-9) ++beaten;
  }
  double lp_gap = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const int p = 1 + static_cast<int>(rng.index(4));
    const int K = 1 + static_cast<int>(rng.index(3));
    const PersuasionSpec s = generate_persuasion(rng, p, 3, K, static_cast<int>(rng.index(4)));
    const Context z = testing::random_context(rng, 3);
    const Eigen::VectorXd omega = rng.dirichlet(K);
    Eigen::VectorXd objective = Eigen::VectorXd::Zero(p);
    for (int i = 0; i < K; ++i) objective += omega[i] * s.C[i].transpose() * z.z();
    const Eigen::VectorXd mu = persuasion_policy_signal(s, z, omega);
    lp_gap = std::max(lp_gap, std::abs(objective.dot(mu) - testing::brute_force_lp_max(s.A, s.c, objective)));
  }
  detail = "auction mismatches " + std::to_string(auction_mismatch) + "/100, beaten by sampling " +
           std::to_string(beaten) + "/100; persuasion max LP gap " + fmt("%.3g", lp_gap) + " (tol 1e-9)";
  return auction_mismatch == 0 && beaten == 0 && lp_gap <= 1e-9;
}

struct Runs {
  json fig1a, fig1b, auction, persuasion;
};

json run_into(const fs::path& config_path, const fs::path& out) {
  fs::remove_all(out);
  const ExperimentConfig c = load_config(config_path);
  return run_experiment(c, out).summary;
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::fprintf(stderr, "usage: acceptance <configs-dir> [work-dir]\n");
    return 2;
  }
  const fs::path configs = argv[1];
  const fs::path work = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "stackbandit_acceptance";
  fs::create_directories(work);

  run(1, linearization);
  run(2, embedding);
  run(3, near_optimality);
  run(4, oful_coverage);

  Runs r;
  const std::vector<std::string> names = {"fig1a", "fig1b", "auction", "persuasion"};
  std::vector<json*> slots = {&r.fig1a, &r.fig1b, &r.auction, &r.persuasion};

  run(5, [&](std::string& detail) {
    *slots[0] = run_into(configs / "fig1a.json", work / "fig1a");
    const json& s = r.fig1a;
    const double oful = back(s, "alg1-oful", "mean_cum_utility");
    const double etc = back(s, "etc", "mean_cum_utility");
    const double rnd = back(s, "random", "mean_cum_utility");
    const auto fo = series(s, "alg1-oful", "final_cum_utility");
    const auto fr = series(s, "random", "final_cum_utility");
    int wins = 0;
    for (std::size_t i = 0; i < fo.size(); ++i) wins += fo[i] > fr[i];
    const double slope = loglog_slope(series(s, "alg1-oful", "mean_cum_pseudo_regret"), 500, 2000);
    const double slope_hindsight = loglog_slope(series(s, "alg1-oful", "mean_cum_regret"), 500, 2000);
    detail = "utility OFUL " + fmt("%.2f", oful) + " > ETC " + fmt("%.2f", etc) + " > Random " +
             fmt("%.2f", rnd) + "; OFUL beats Random on " + std::to_string(wins) + "/" +
             std::to_string(fo.size()) + " seeds; pseudo-regret slope " + fmt("%.3f", slope) +
             " (<= 0.65; hindsight-regret slope " + fmt("%.3f", slope_hindsight) + ")";
    return oful > etc && etc > rnd && wins >= 9 && fo.size() == 10 && slope <= 0.65;
  });

  run(6, [&](std::string& detail) {
    *slots[1] = run_into(configs / "fig1b.json", work / "fig1b");
    const double oful = back(r.fig1b, "alg1-oful", "mean_cum_utility");
    const double rnd = back(r.fig1b, "random", "mean_cum_utility");
    json with_etc = json::parse(slurp(configs / "fig1b.json"));
    with_etc["algorithms"].push_back("etc");
    bool refused = false;
    try {
      config_from_json(with_etc);
    } catch (const std::invalid_argument&) {
      refused = true;
    }
    detail = "utility OFUL " + fmt("%.2f", oful) + " > Random " + fmt("%.2f", rnd) + " over " +
             std::to_string(r.fig1b.at("seeds").size()) + " seeds; ETC " +
             (refused ? "refused" : "NOT refused") + " by validation";
    return oful > rnd && refused && r.fig1b.at("seeds").size() == 10;
  });

  run(7, wrapper_contract);
  run(8, policy_exactness);

  run(9, [&](std::string& detail) {
    *slots[2] = run_into(configs / "auction.json", work / "auction");
    *slots[3] = run_into(configs / "persuasion.json", work / "persuasion");
    const double a = loglog_slope(series(r.auction, "auction-oful", "mean_cum_pseudo_regret"), 500, 2000);
    const double p = loglog_slope(series(r.persuasion, "persuasion-oful", "mean_cum_pseudo_regret"), 500, 2000);
    detail = "pseudo-regret slope auction " + fmt("%.3f", a) + ", persuasion " + fmt("%.3f", p) + " (<= 0.65)";
    return a <= 0.65 && p <= 0.65;
  });

  run(10, [&](std::string& detail) {
    std::string bad;
    for (const auto& name : names) {
      run_into(configs / (name + ".json"), work / (name + "_rerun"));
      const std::string diff = compare_dirs(work / name, work / (name + "_rerun"));
      if (!diff.empty()) bad += " " + name + ":" + diff;
    }
    detail = bad.empty() ? "all four experiments reproduce byte-identical CSV and summary files"
                         : "differences in" + bad;
    return bad.empty();
  });

  std::printf("%s: %d criteria failed\n", failures ? "FAIL" : "PASS", failures);
  return failures ? 1 : 0;
}
