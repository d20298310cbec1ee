// Command-line front end: train, evaluate, genie, sweep-sinr, sweep-radius,
// fairness. Results go to --out; a JSON summary is printed on stdout.

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "vcell/baselines.hpp"
#include "vcell/environment.hpp"
#include "vcell/harness.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace vcell;

namespace {

struct CommonArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  std::string solver;
  std::optional<std::size_t> episodes;
};

void add_common(CLI::App* cmd, CommonArgs& a) {
  cmd->add_option("--config", a.config, "experiment config (JSON)")->required();
  cmd->add_option("--seed", a.seed, "run a single seed instead of the config's list");
  cmd->add_option("--out", a.out, "output directory");
  cmd->add_option("--solver", a.solver, "sarl, marl, sarl_marl, genie, random or equal");
  cmd->add_option("--episodes", a.episodes, "training episodes");
}

harness::Solver solver_or_throw(const std::string& name) {
  auto s = harness::parse_solver(name);
  if (!s) throw ConfigError("solver", "unknown solver '" + name + "'");
  return *s;
}

harness::ExperimentConfig load(const CommonArgs& a) {
  auto c = harness::load_config(a.config);
  if (a.seed) c.seeds = {*a.seed};
  if (!a.solver.empty()) c.solver = solver_or_throw(a.solver);
  if (a.episodes) c.learning.episodes = *a.episodes;
  c.validate();
  return c;
}

std::vector<harness::Solver> solver_list(const std::string& csv, harness::Solver fallback) {
  std::vector<harness::Solver> out;
  if (csv.empty()) {
    out.push_back(harness::Solver::Genie);
    if (fallback != harness::Solver::Genie) out.push_back(fallback);
    return out;
  }
  std::stringstream ss(csv);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(solver_or_throw(item));
  return out;
}

json run_summary(const std::vector<harness::RunResult>& results) {
  json j = json::array();
  for (const auto& r : results) j.push_back(harness::summary_json(r));
  return j;
}

void write_sweep_file(const fs::path& path, std::string_view parameter,
                      const harness::ExperimentConfig& c, const std::vector<harness::SweepRow>& rows) {
  fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  harness::write_sweep(f, parameter, c, rows);
  harness::write_sweep(std::cout, parameter, c, rows);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Vehicular virtual-cell downlink simulator and learners"};
  app.require_subcommand(1);

  CommonArgs train_args, eval_args, genie_args, sinr_args, radius_args;
  auto* train = app.add_subcommand("train", "train a learning solver and evaluate its greedy policy");
  add_common(train, train_args);
  auto* evaluate = app.add_subcommand("evaluate", "evaluate any solver over the test episodes");
  add_common(evaluate, eval_args);
  auto* genie = app.add_subcommand("genie", "export per-state genie tables and evaluate the genie");
  add_common(genie, genie_args);

  std::vector<double> thresholds{6, 8, 10, 12, 14};
  std::vector<double> radii{100, 150, 200, 250, 300};
  std::string sinr_solvers, radius_solvers;
  auto* sweep_sinr = app.add_subcommand("sweep-sinr", "sweep the SINR threshold");
  add_common(sweep_sinr, sinr_args);
  sweep_sinr->add_option("--thresholds", thresholds, "SINR thresholds in dB (ascending)")->delimiter(',');
  sweep_sinr->add_option("--solvers", sinr_solvers, "comma-separated solvers");
  auto* sweep_radius = app.add_subcommand("sweep-radius", "sweep the AP coverage radius");
  add_common(sweep_radius, radius_args);
  sweep_radius->add_option("--radii", radii, "radii in m (ascending)")->delimiter(',');
  sweep_radius->add_option("--solvers", radius_solvers, "comma-separated solvers");

  std::string log_path;
  auto* fairness = app.add_subcommand("fairness", "per-VU rate summary of an episode log");
  fairness->add_option("--log", log_path, "episode log CSV")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      auto c = load(train_args);
      if (!harness::is_learning(c.solver))
        throw ConfigError("solver", "train needs sarl, marl or sarl_marl");
      std::cout << run_summary(harness::run(c, train_args.out)).dump(2) << '\n';
    } else if (*evaluate) {
      auto c = load(eval_args);
      std::cout << run_summary(harness::run(c, eval_args.out)).dump(2) << '\n';
    } else if (*genie) {
      auto c = load(genie_args);
      c.solver = harness::Solver::Genie;
      fs::create_directories(genie_args.out);
      for (std::uint64_t seed : c.seeds) {
        Environment env(c.scenario, seed);
        const auto table = baselines::genie_table(env, c.genie_mc_draws);
        std::ofstream f(fs::path(genie_args.out) / ("genie_table_seed" + std::to_string(seed) + ".csv"),
                        std::ios::binary);
        f << "# config_hash=" << harness::config_hash(c) << "\n# seed=" << seed << '\n';
        baselines::write_genie_table(f, env, table);
      }
      std::cout << run_summary(harness::run(c, genie_args.out)).dump(2) << '\n';
    } else if (*sweep_sinr) {
      auto c = load(sinr_args);
      const auto rows =
          harness::sweep_sinr_threshold(c, thresholds, solver_list(sinr_solvers, c.solver));
      write_sweep_file(fs::path(sinr_args.out) / "sweep_sinr.csv", "gamma_min_db", c, rows);
    } else if (*sweep_radius) {
      auto c = load(radius_args);
      const auto rows =
          harness::sweep_coverage_radius(c, radii, solver_list(radius_solvers, c.solver));
      write_sweep_file(fs::path(radius_args.out) / "sweep_radius.csv", "coverage_radius_m", c, rows);
    } else if (*fairness) {
      std::ifstream f(log_path);
      if (!f) throw std::runtime_error("cannot open " + log_path);
      std::cout << harness::to_json(harness::fairness_report(harness::read_log(f))).dump(2) << '\n';
    }
  } catch (const ConfigError& e) {
    json err{{"error", "invalid_config"}, {"fields", json::array()}};
    for (const auto& f : e.fields()) err["fields"].push_back({{"field", f.field}, {"message", f.message}});
    std::cerr << err.dump(2) << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", e.what()}}.dump(2) << '\n';
    return 1;
  }
  return 0;
}
