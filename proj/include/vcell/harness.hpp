#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "vcell/agents.hpp"
#include "vcell/baselines.hpp"
#include "vcell/errors.hpp"
#include "vcell/scenario.hpp"

namespace vcell::harness {

enum class Solver { Sarl, Marl, SarlMarl, Genie, Random, Equal };

std::string_view solver_name(Solver solver);
std::optional<Solver> parse_solver(std::string_view name);
bool is_learning(Solver solver);

struct ExperimentConfig {
  ScenarioConfig scenario;
  agents::LearningConfig learning;
  Solver solver = Solver::SarlMarl;
  std::vector<std::uint64_t> seeds{1};
  std::size_t test_episodes = 250;
  // Monte Carlo draws per state for the genie in stochastic fading mode.
  std::size_t genie_mc_draws = 16;
  baselines::RandomGrid random_grid = baselines::RandomGrid::Verbatim;
  // Writes every Q update to <solver>_seed<seed>_updates.csv (large).
  bool record_updates = false;

  void validate(FieldErrors& errors) const;
  void validate() const;
};

// Canonical JSON form; every field is written, keys mirror the struct names.
nlohmann::json to_json(const ExperimentConfig& config);
// Missing keys keep their defaults; unknown keys and type mismatches are
// reported together as a ConfigError.
ExperimentConfig config_from_json(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

// FNV-1a (64 bit, hex) of the canonical JSON dump.
std::string config_hash(const ExperimentConfig& config);

struct StepRecord {
  std::size_t episode = 0;
  std::size_t step = 0;
  std::size_t state = 0;
  std::int64_t action = -1;  // dense index, -1 for plans off the action grid
  std::vector<double> sinr_db;
  std::vector<double> rate;
  std::vector<std::size_t> serving;
  double reward = 0.0;
  bool feasible = false;
  bool violation = true;  // infeasible or some VU below its SINR floor
};

struct EpisodeLog {
  std::string config_hash;
  std::uint64_t seed = 0;
  std::string solver;
  std::string action_space;
  std::size_t vu_count = 0;
  std::vector<StepRecord> steps;
};

// CSV with '#' header lines (config_hash, seed, solver, action_space) and
// columns episode,step,state,action,sinr_db_<i>...,rate_<i>...,serving_<i>...,
// reward,feasible,violation.
void write_log(std::ostream& out, const EpisodeLog& log);
EpisodeLog read_log(std::istream& in);

struct SummaryMetrics {
  std::size_t steps = 0;
  std::size_t vu_count = 0;
  double wsr = 0.0;                // mean per-step weighted sum rate
  double avg_per_vu_reward = 0.0;  // sum of rewards / (steps * U)
  std::vector<double> rate_means;
  double success_probability = 0.0;
};

// Everything here is derived from the log alone.
SummaryMetrics summarize(const EpisodeLog& log);

// Reward recomputed from the logged SINR, serving counts and violation flag.
double recompute_reward(const StepRecord& step, const phy::PhyConfig& phy);

struct TrainingInfo {
  std::size_t episodes = 0;
  agents::TrainingCurve curve;
  std::optional<double> genie_per_vu_reward;
  std::optional<std::size_t> episodes_to_threshold;
};

// First episode at which the trailing mean of the greedy curve over the last
// `window` episodes reaches `fraction` of the reference.
std::optional<std::size_t> episodes_to_threshold(const std::vector<agents::GreedyPoint>& curve,
                                                 double reference, double fraction = 0.95,
                                                 std::size_t window = 100);

struct RunResult {
  Solver solver = Solver::Genie;
  std::uint64_t seed = 0;
  EpisodeLog log;
  SummaryMetrics summary;
  std::optional<TrainingInfo> training;
};

// Trains (if needed) and evaluates one solver for one seed. Q updates are
// streamed to `sink` when given.
RunResult run_once(const ExperimentConfig& config, std::uint64_t seed,
                   const agents::UpdateSink& sink = {});

// Q-update log: episode,step,agent,state,action,reward,max_next,q_old,q_new,
// epsilon,alpha,discount,terminal.
void write_update_header(std::ostream& out);
void write_update(std::ostream& out, const agents::UpdateRecord& rec);
std::vector<agents::UpdateRecord> read_updates(std::istream& in);

nlohmann::json summary_json(const RunResult& result);

// Runs every seed and writes <solver>_seed<seed>.csv / .json plus
// <solver>_summary.json (means over seeds) into `out_dir`.
std::vector<RunResult> run(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct SweepRow {
  double parameter = 0.0;
  Solver solver = Solver::Genie;
  double wsr = 0.0;
  double avg_per_vu_reward = 0.0;
  double success_probability = 0.0;
};

// One row per (point, solver), averaged over the configured seeds. Points
// must be ascending.
std::vector<SweepRow> sweep_sinr_threshold(const ExperimentConfig& config,
                                           const std::vector<double>& thresholds_db,
                                           const std::vector<Solver>& solvers);
std::vector<SweepRow> sweep_coverage_radius(const ExperimentConfig& config,
                                            const std::vector<double>& radii_m,
                                            const std::vector<Solver>& solvers);

void write_sweep(std::ostream& out, std::string_view parameter, const ExperimentConfig& config,
                 const std::vector<SweepRow>& rows);

struct FairnessReport {
  std::size_t qualifying_steps = 0;
  std::vector<double> rate_mean;
  std::vector<double> rate_min;
};

// Per-VU rate statistics over steps with nonzero reward. Throws
// std::invalid_argument for an empty log or when no step qualifies.
FairnessReport fairness_report(const EpisodeLog& log);

nlohmann::json to_json(const FairnessReport& report);

}  // namespace vcell::harness
