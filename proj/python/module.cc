#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "stackbandit/bandit.h"
#include "stackbandit/game.h"
#include "stackbandit/geometry.h"
#include "stackbandit/harness.h"
#include "stackbandit/markets.h"
#include "stackbandit/reduction.h"

namespace py = pybind11;
using nlohmann::json;
using namespace stackbandit;

namespace {

// JSON crosses the boundary as text; the Python package wraps these in json.loads/dumps.
Game game_from_text(const std::string& text) { return game_from_json(json::parse(text)); }

py::dict menu_dict(const ExtremePointSet& set) {
  std::vector<Eigen::VectorXd> strategies;
  std::vector<std::vector<int>> sigma;
  std::vector<bool> perturbed;
  for (const auto& p : set.points) {
    strategies.push_back(p.strategy.probs());
    sigma.push_back(p.sigma.actions);
    perturbed.push_back(p.perturbed);
  }
  py::dict d;
  d["strategies"] = strategies;
  d["sigma"] = sigma;
  d["perturbed"] = perturbed;
  d["delta"] = set.delta;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "stackbandit native core";

  py::class_<Game>(m, "Game")
      .def(py::init(&game_from_text), py::arg("json_text"))
      .def_property_readonly("context_dim", &Game::context_dim)
      .def_property_readonly("leader_actions", &Game::leader_actions)
      .def_property_readonly("follower_actions", &Game::follower_actions)
      .def_property_readonly("follower_types", &Game::follower_types)
      .def("to_json", [](const Game& g) { return game_to_json(g).dump(); });

  m.def("generate_game", &generate_game, py::arg("seed"), py::arg("d"), py::arg("K"),
        py::arg("leader_actions"), py::arg("follower_actions"),
        py::arg("context_dependent_followers") = false);

  m.def(
      "best_response",
      [](const Game& g, const Eigen::VectorXd& z, const Eigen::VectorXd& x, int k) {
        return follower_best_response(g, Context(z), MixedStrategy(x), k);
      },
      py::arg("game"), py::arg("z"), py::arg("x"), py::arg("k"));
  m.def(
      "utility_vector",
      [](const Game& g, const Eigen::VectorXd& z, const Eigen::VectorXd& x) {
        return utility_vector(g, Context(z), MixedStrategy(x)).values;
      },
      py::arg("game"), py::arg("z"), py::arg("x"));
  m.def(
      "h_embedding",
      [](const Game& g, const Eigen::VectorXd& z, const Eigen::VectorXd& x) {
        return h_embedding(g, Context(z), MixedStrategy(x));
      },
      py::arg("game"), py::arg("z"), py::arg("x"));
  m.def("embedding_parameter", &embedding_parameter, py::arg("game"), py::arg("gamma"));
  m.def("flat_index", &flat_index, py::arg("i"), py::arg("a_l"), py::arg("a_f"), py::arg("j"),
        py::arg("K"), py::arg("leader_actions"), py::arg("follower_actions"), py::arg("d"));
  m.def(
      "extreme_points",
      [](const Game& g, const Eigen::VectorXd& z, double delta, bool effective_types) {
        GeometryOptions opt;
        opt.use_effective_types = effective_types;
        return menu_dict(approximate_extreme_points(g, Context(z), delta, opt));
      },
      py::arg("game"), py::arg("z"), py::arg("delta"), py::arg("effective_types") = true);

  py::class_<Oful>(m, "Oful")
      .def(py::init([](int dim, double lambda, double noise_scale, double confidence, double theta_bound) {
             return Oful(dim, OfulConfig{lambda, noise_scale, confidence, theta_bound});
           }),
           py::arg("dim"), py::arg("lam") = 1.0, py::arg("noise_scale") = 4.0, py::arg("confidence") = 0.1,
           py::arg("theta_bound") = 1.0)
      .def("recommend",
           [](Oful& o, const std::vector<Eigen::VectorXd>& actions) { return o.recommend(actions); })
      .def("observe_utility", &Oful::observe_utility, py::arg("chosen"), py::arg("utility"))
      .def_property_readonly("theta_hat", &Oful::theta_hat)
      .def_property_readonly("beta", &Oful::beta)
      .def("confidence_contains", &Oful::confidence_contains);

  m.def(
      "simplex_grid",
      [](int K, int N) {
        const SimplexGrid g = simplex_grid(K, N);
        std::vector<Eigen::VectorXd> pts;
        for (std::size_t i = 0; i < g.size(); ++i) pts.push_back(g.point(i));
        return pts;
      },
      py::arg("K"), py::arg("N"));
  m.def(
      "auction_policy_bid",
      [](const std::string& spec, const Eigen::VectorXd& z, const Eigen::VectorXd& omega) {
        return auction_policy_bid(auction_from_json(json::parse(spec)), Context(z), omega);
      },
      py::arg("spec_json"), py::arg("z"), py::arg("omega"));
  m.def(
      "persuasion_policy_signal",
      [](const std::string& spec, const Eigen::VectorXd& z, const Eigen::VectorXd& omega) {
        return persuasion_policy_signal(persuasion_from_json(json::parse(spec)), Context(z), omega);
      },
      py::arg("spec_json"), py::arg("z"), py::arg("omega"));

  m.def(
      "run_experiment",
      [](const std::string& config, std::optional<std::filesystem::path> out) {
        const ExperimentConfig c = config_from_json(json::parse(config));
        py::gil_scoped_release release;
        return run_experiment(c, out).summary.dump();
      },
      py::arg("config_json"), py::arg("out") = py::none());
  m.def(
      "regret_from_logs", [](const std::filesystem::path& dir) { return regret_from_logs(dir).dump(); },
      py::arg("dir"));
  m.def("loglog_slope", &loglog_slope, py::arg("series"), py::arg("lo"), py::arg("hi"));
}
