#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "stackbandit/game.h"
#include "stackbandit/geometry.h"
#include "stackbandit/harness.h"
#include "stackbandit/reduction.h"

namespace fs = std::filesystem;
using namespace stackbandit;

namespace {

int cmd_run(const std::string& config_path, const std::string& seeds, const std::string& out) {
  ExperimentConfig config = load_config(config_path);
  if (!seeds.empty()) config.seeds = parse_seeds(seeds);
  fs::path dir;
  if (!out.empty()) {
    dir = out;
  } else if (config.out_dir) {
    dir = *config.out_dir;
  } else {
    dir = fs::path("runs") / config.name;
  }
  const ExperimentResult result = run_experiment(config, dir);
  const auto& algs = result.summary.at("algorithms");
  for (const auto& tag : config.algorithms) {
    const auto& a = algs.at(tag);
    std::cout << tag << ": mean cumulative utility " << a.at("mean_cum_utility").back().get<double>()
              << ", mean cumulative regret " << a.at("mean_cum_regret").back().get<double>()
              << ", mean pseudo-regret " << a.at("mean_cum_pseudo_regret").back().get<double>();
    if (a.contains("explore_rounds")) std::cout << " (explore_rounds " << a.at("explore_rounds") << ")";
    std::cout << "\n";
  }
  std::cout << "wrote " << dir.string() << "\n";
  return 0;
}

int cmd_regret(const std::string& dir) {
  const nlohmann::json report = regret_from_logs(dir);
  nlohmann::json brief;
  brief["seeds"] = report.at("seeds");
  for (const auto& [tag, entry] : report.at("algorithms").items()) {
    brief["algorithms"][tag] = {{"final_cum_regret", entry.at("final_cum_regret")},
                                {"mean_final_cum_regret", entry.at("mean_cum_regret").back()}};
  }
  std::cout << brief.dump(2) << "\n";
  return 0;
}

int cmd_dump_menu(const std::string& game_path, const std::string& row, double delta) {
  std::ifstream in(game_path);
  if (!in) throw std::runtime_error("cannot open '" + game_path + "'");
  const nlohmann::json doc = nlohmann::json::parse(in);
  if (doc.contains("kind")) {
    throw std::runtime_error("'" + game_path + "' holds a " + doc.at("kind").get<std::string>() +
                             " spec; dump-menu takes a Stackelberg game file (game_seed<k>.json)");
  }
  const Game game = game_from_json(doc);
  const Context z(parse_csv_row(row));
  if (z.dim() != game.context_dim()) {
    throw std::runtime_error("context has " + std::to_string(z.dim()) + " entries, the game expects " +
                             std::to_string(game.context_dim()));
  }
  const Menu menu = build_menu(game, z, delta);
  nlohmann::json j = extreme_points_to_json(menu.points);
  for (std::size_t i = 0; i < menu.utilities.size(); ++i) {
    const auto& u = menu.utilities[i];
    j["points"][i]["utilities"] = std::vector<double>(u.data(), u.data() + u.size());
  }
  std::cout << j.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Leader learning in contextual Stackelberg games"};
  app.require_subcommand(1);

  std::string config_path, seeds, out;
  auto* run = app.add_subcommand("run", "Run an experiment config and write CSV logs and summary.json");
  run->add_option("--config", config_path, "Experiment config (JSON)")->required()->check(CLI::ExistingFile);
  run->add_option("--seeds", seeds, "Seeds, e.g. 0..9 or 1,2,3 (overrides the config)");
  run->add_option("--out", out, "Output directory (default: config 'out', else runs/<name>)");

  std::string log_dir;
  auto* regret = app.add_subcommand("regret", "Recompute hindsight regret from an output directory");
  regret->add_option("--log", log_dir, "Directory written by 'run'")->required()->check(CLI::ExistingDirectory);

  std::string game_path, context_row;
  double delta = 1e-3;
  auto* dump = app.add_subcommand("dump-menu", "Print the strategy menu of a game at one context");
  dump->add_option("--game", game_path, "GameSpec JSON")->required()->check(CLI::ExistingFile);
  dump->add_option("--context", context_row, "Context as a comma-separated row")->required();
  dump->add_option("--delta", delta, "Perturbation size")->capture_default_str();

  CLI11_PARSE(app, argc, argv);
  try {
    if (*run) return cmd_run(config_path, seeds, out);
    if (*regret) return cmd_regret(log_dir);
    if (*dump) return cmd_dump_menu(game_path, context_row, delta);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
