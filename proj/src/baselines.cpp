#include "vcell/baselines.hpp"

#include <algorithm>
#include <iomanip>
#include <random>
#include <stdexcept>
#include <string>

#include "vcell/units.hpp"

namespace vcell::baselines {

std::optional<GenieChoice> genie_search(const Environment& env, std::size_t bin,
                                        std::size_t mc_draws) {
  if (bin >= env.state_count()) throw std::domain_error("genie_search: state out of range");
  const auto& actions = env.actions();
  const auto& cfg = env.config();
  const auto& cov = env.coverage(bin);
  const std::size_t n = actions.size();
  const std::size_t draws = env.frozen() ? 1 : std::max<std::size_t>(mc_draws, 1);

  std::vector<double> mw(actions.ap_count() * actions.vu_count());
  std::vector<double> total(n, 0.0);
  std::vector<char> feasible(n, 0);
  for (std::size_t k = 0; k < draws; ++k) {
    const std::uint64_t draw = env.frozen() ? 0 : kMonteCarloDrawBase + k;
    const phy::LinkGains gains = env.gains(bin, draw);
    phy::RewardKernel kernel(gains, cov, cfg.phy, cfg.channel.noise_variance_mw);
    for (std::size_t a = 0; a < n; ++a) {
      actions.fill_powers(actions.raw_code(a), mw);
      const auto r = kernel(mw);
      feasible[a] = r.feasible;
      total[a] += r.reward;
    }
  }

  std::optional<GenieChoice> best;
  for (std::size_t a = 0; a < n; ++a) {
    if (!feasible[a]) continue;
    const double mean = total[a] / static_cast<double>(draws);
    if (!best || mean > best->reward) best = GenieChoice{a, mean};
  }
  return best;
}

GenieChoice genie_optimal(const Environment& env, std::size_t bin, std::size_t mc_draws) {
  auto best = genie_search(env, bin, mc_draws);
  if (!best)
    throw InfeasibleStateError("genie_optimal: no feasible action at state " + std::to_string(bin));
  return *best;
}

GenieTable genie_table(const Environment& env, std::size_t mc_draws) {
  GenieTable table(env.state_count());
  for (std::size_t s = 0; s < env.state_count(); ++s) table[s] = genie_search(env, s, mc_draws);
  return table;
}

void write_genie_table(std::ostream& out, const Environment& env, const GenieTable& table) {
  out << "state,action,raw_code,reward\n";
  out << std::setprecision(17);
  for (std::size_t s = 0; s < table.size(); ++s) {
    out << s << ',';
    if (table[s])
      out << table[s]->action << ',' << env.actions().raw_code(table[s]->action) << ','
          << table[s]->reward;
    else
      out << ",,";
    out << '\n';
  }
}

const std::vector<double>& random_levels_dbm(RandomGrid grid) {
  static const std::vector<double> verbatim{5.0, 5.0, 15.0};
  static const std::vector<double> corrected{5.0, 10.0, 15.0};
  return grid == RandomGrid::Verbatim ? verbatim : corrected;
}

phy::PowerPlan random_power_policy(std::size_t ap_count, std::size_t vu_count, Rng& rng,
                                   RandomGrid grid) {
  const auto& levels = random_levels_dbm(grid);
  std::uniform_int_distribution<std::size_t> pick(0, levels.size() - 1);
  phy::PowerPlan plan(ap_count, vu_count);
  for (std::size_t j = 0; j < ap_count; ++j) {
    const double p = dbm_to_mw(levels[pick(rng)]);
    for (std::size_t i = 0; i < vu_count; ++i) plan.at(j, i) = p;
  }
  return plan;
}

phy::PowerPlan equal_power_policy(const ScenarioConfig& config) {
  const std::size_t vus = config.vu_count();
  if (vus == 0) throw ConfigError("drop.vu_count", "equal power needs at least one VU");
  phy::PowerPlan plan(config.ap_count(), vus);
  for (std::size_t j = 0; j < plan.ap_count; ++j)
    for (std::size_t i = 0; i < vus; ++i)
      plan.at(j, i) = config.phy.p_max_mw(j) / static_cast<double>(vus);
  return plan;
}

namespace {

std::uint64_t value_draw(const Environment& env) { return env.frozen() ? 0 : kMonteCarloDrawBase; }

}  // namespace

PolicyResult evaluate_plans(const Environment& env, std::vector<phy::PowerPlan> plans) {
  if (plans.size() != env.state_count())
    throw std::invalid_argument("evaluate_plans: need one plan per state");
  PolicyResult out;
  out.actions.assign(plans.size(), std::nullopt);
  out.rewards.resize(plans.size());
  double total = 0.0;
  for (std::size_t s = 0; s < plans.size(); ++s) {
    out.rewards[s] = env.evaluate_at(s, plans[s], value_draw(env)).reward;
    total += out.rewards[s];
  }
  out.plans = std::move(plans);
  out.per_vu_reward =
      total / static_cast<double>(env.state_count() * env.config().vu_count());
  return out;
}

PolicyResult genie_policy(const Environment& env, const GenieTable& table) {
  std::vector<phy::PowerPlan> plans;
  plans.reserve(table.size());
  for (const auto& g : table)
    plans.push_back(g ? env.actions().plan(g->action)
                      : phy::PowerPlan(env.config().ap_count(), env.config().vu_count()));
  PolicyResult out = evaluate_plans(env, std::move(plans));
  for (std::size_t s = 0; s < table.size(); ++s)
    if (table[s]) out.actions[s] = table[s]->action;
  return out;
}

}  // namespace vcell::baselines
