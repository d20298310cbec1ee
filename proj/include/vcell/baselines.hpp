#pragma once

#include <cstddef>
#include <optional>
#include <ostream>
#include <vector>

#include "vcell/environment.hpp"
#include "vcell/phy.hpp"
#include "vcell/rng.hpp"

namespace vcell::baselines {

struct GenieChoice {
  std::size_t action = 0;  // dense index
  double reward = 0.0;     // Monte Carlo mean in stochastic mode
};

// Exhaustive search over every feasible action at a state bin, lowest index
// on ties. Stochastic mode averages over `mc_draws` reserved draws. Returns
// nullopt when no action is feasible.
std::optional<GenieChoice> genie_search(const Environment& env, std::size_t bin,
                                        std::size_t mc_draws = 1);

// As genie_search but throws InfeasibleStateError on an empty feasible set.
GenieChoice genie_optimal(const Environment& env, std::size_t bin, std::size_t mc_draws = 1);

using GenieTable = std::vector<std::optional<GenieChoice>>;

GenieTable genie_table(const Environment& env, std::size_t mc_draws = 1);

// CSV with one row per state: state,action,raw_code,reward (empty fields for
// infeasible states).
void write_genie_table(std::ostream& out, const Environment& env, const GenieTable& table);

enum class RandomGrid {
  Verbatim,   // {5, 5, 15} dBm
  Corrected,  // {5, 10, 15} dBm
};

const std::vector<double>& random_levels_dbm(RandomGrid grid);

// Every AP draws one level from the grid's multiset and uses it for all VUs.
phy::PowerPlan random_power_policy(std::size_t ap_count, std::size_t vu_count, Rng& rng,
                                   RandomGrid grid = RandomGrid::Verbatim);

// P_max / U (linear) on every pair.
phy::PowerPlan equal_power_policy(const ScenarioConfig& config);

struct PolicyResult {
  std::vector<std::optional<std::size_t>> actions;  // dense index when on the grid
  std::vector<phy::PowerPlan> plans;
  std::vector<double> rewards;
  double per_vu_reward = 0.0;
};

// Evaluates one plan per state on the environment's channels (frozen, or
// the first reserved Monte Carlo draw in stochastic mode).
PolicyResult evaluate_plans(const Environment& env, std::vector<phy::PowerPlan> plans);

// Genie policy over every state; infeasible states score zero.
PolicyResult genie_policy(const Environment& env, const GenieTable& table);

}  // namespace vcell::baselines
