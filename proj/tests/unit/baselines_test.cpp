#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>
#include <sstream>

#include "test_support.hpp"
#include "vcell/baselines.hpp"
#include "vcell/units.hpp"

using namespace vcell;
using namespace vcell::baselines;

namespace {

// Full reference path: beams, metrics, feasibility and reward without the
// precomputed gains.
double reference_reward(const Environment& env, std::size_t bin, const phy::PowerPlan& plan) {
  const auto ch = env.channel(bin, 0);
  const auto& cov = env.coverage(bin);
  const auto& cfg = env.config();
  if (!phy::check_feasible(plan, cfg.phy, cov)) return 0.0;
  const auto m = phy::compute_metrics(ch, phy::build_beams(ch, plan, cov),
                                      cfg.channel.noise_variance_mw, cfg.phy.kappa);
  return phy::reward(m, cfg.phy);
}

}  // namespace

TEST_SUITE("baselines") {

TEST_CASE("interference-free genie uses full power on every AP") {
  ScenarioConfig c;
  c.road.lane_count = 1;
  c.drop.vu_count = 1;
  c.aps.x_m = {150.0, 300.0};
  c.actions.levels_dbm = {5.0, 20.0};
  c.actions.mode = ActionMode::PerPair;
  c.phy.gamma_min_db = {-100.0};
  Environment env(c, 3);
  std::size_t checked = 0;
  for (std::size_t s = 0; s < env.state_count(); ++s) {
    const auto& cov = env.coverage(s);
    if (!(cov(0, 0) && cov(0, 1))) continue;
    const auto g = genie_optimal(env, s);
    const auto plan = env.actions().plan(g.action);
    CHECK(plan.at(0, 0) == doctest::Approx(100.0));
    CHECK(plan.at(1, 0) == doctest::Approx(100.0));
    ++checked;
  }
  CHECK(checked > 10);
}

TEST_CASE("genie reward dominates every enumerated action") {
  Environment env(ScenarioConfig{}, 2);
  for (std::size_t s = 0; s < env.state_count(); s += 4) {
    const auto g = genie_search(env, s);
    REQUIRE(g);
    for (std::size_t a = 0; a < env.action_count(); ++a) {
      const double r = env.evaluate_at(s, env.actions().plan(a), 0).reward;
      CHECK(r <= g->reward);
      if (a < g->action) CHECK(r < g->reward);  // lowest index among the maxima
    }
    CHECK(env.reward_at(s, g->action, 0) == g->reward);
  }
}

TEST_CASE("full-scale genie agrees with a shuffled reference enumeration") {
  ScenarioConfig c;
  c.actions.mode = ActionMode::PerPair;
  Environment env(c, 1);
  REQUIRE(env.action_count() == 262144);

  std::size_t bin = 0;
  std::optional<GenieChoice> g;
  for (std::size_t s = 30; s < env.state_count(); ++s) {
    g = genie_search(env, s);
    if (g && g->reward > 0.0) {
      bin = s;
      break;
    }
  }
  REQUIRE(g);
  REQUIRE(g->reward > 0.0);

  std::vector<std::size_t> order(env.action_count());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), std::mt19937_64(99));
  double best = -1.0;
  std::size_t best_action = 0;
  for (std::size_t a : order) {
    const double r = reference_reward(env, bin, env.actions().plan(a));
    if (r > best || (r == best && a < best_action)) {
      best = r;
      best_action = a;
    }
  }
  CHECK(testing::rel_close(best, g->reward, 1e-12));
  CHECK(testing::rel_close(reference_reward(env, bin, env.actions().plan(g->action)), best, 1e-12));
}

TEST_CASE("empty feasible set raises an error") {
  ScenarioConfig c;
  c.aps.x_m = {400.0};
  c.aps.coverage_radius_m = 50.0;
  Environment env(c, 1);
  REQUIRE_FALSE(env.coverage(0)(0, 0));
  CHECK_FALSE(genie_search(env, 0).has_value());
  CHECK_THROWS_AS(genie_optimal(env, 0), InfeasibleStateError);

  const auto table = genie_table(env);
  std::ostringstream os;
  write_genie_table(os, env, table);
  CHECK(os.str().rfind("state,action,raw_code,reward\n0,,,\n", 0) == 0);
  CHECK(genie_policy(env, table).rewards[0] == 0.0);
}

TEST_CASE("stochastic genie maximizes the Monte Carlo mean") {
  ScenarioConfig c;
  c.channel.fading = channel::FadingMode::Stochastic;
  c.phy.gamma_min_db = {0.0};
  Environment env(c, 4);
  const std::size_t bin = 60;
  const auto g = genie_optimal(env, bin, 6);
  std::vector<double> mean(env.action_count(), 0.0);
  for (std::size_t k = 0; k < 6; ++k)
    for (std::size_t a = 0; a < env.action_count(); ++a)
      mean[a] += env.evaluate_at(bin, env.actions().plan(a), kMonteCarloDrawBase + k).reward / 6.0;
  for (std::size_t a = 0; a < env.action_count(); ++a) CHECK(mean[a] <= g.reward * (1 + 1e-12));
  CHECK(testing::rel_close(mean[g.action], g.reward, 1e-12));
}

TEST_CASE("random power follows the multiset weights") {
  Rng rng(5);
  const int n = 100000;
  std::size_t low = 0, high = 0, mid = 0;
  for (int k = 0; k < n; ++k) {
    const auto plan = random_power_policy(1, 3, rng);
    CHECK(plan.at(0, 0) == plan.at(0, 2));
    const double dbm = mw_to_dbm(plan.at(0, 0));
    if (std::abs(dbm - 5.0) < 1e-9) ++low;
    else if (std::abs(dbm - 15.0) < 1e-9) ++high;
    else ++mid;
  }
  CHECK(mid == 0);
  CHECK(std::abs(static_cast<double>(low) / n - 2.0 / 3.0) <= 0.01);
  CHECK(std::abs(static_cast<double>(high) / n - 1.0 / 3.0) <= 0.01);

  std::size_t ten = 0;
  for (int k = 0; k < n; ++k)
    if (std::abs(mw_to_dbm(random_power_policy(1, 1, rng, RandomGrid::Corrected).at(0, 0)) - 10.0) < 1e-9)
      ++ten;
  CHECK(std::abs(static_cast<double>(ten) / n - 1.0 / 3.0) <= 0.01);
}

TEST_CASE("random power is seeded") {
  Rng a(8), b(8);
  for (int k = 0; k < 100; ++k) CHECK(random_power_policy(3, 3, a).mw == random_power_policy(3, 3, b).mw);
}

TEST_CASE("equal power splits the budget linearly") {
  ScenarioConfig c;
  const auto plan = equal_power_policy(c);
  CHECK(plan.at(1, 2) == doctest::Approx(105.41).epsilon(1e-4));
  CHECK(mw_to_dbm(plan.at(1, 2)) == doctest::Approx(20.23).epsilon(1e-4));
  CHECK(phy::check_feasible(plan, c.phy, channel::Coverage::all(3, 3)));
  for (std::size_t j = 0; j < 3; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < 3; ++i) total += plan.at(j, i);
    CHECK(testing::rel_close(total, c.phy.p_max_mw(j), 1e-12));
  }

  c.road.lane_count = 1;
  c.drop.vu_count = 1;
  CHECK(equal_power_policy(c).at(0, 0) == doctest::Approx(dbm_to_mw(25.0)));
}

TEST_CASE("equal power stays feasible wherever every VU is covered") {
  ScenarioConfig c;
  Environment env(c, 3);
  const auto plan = equal_power_policy(c);
  for (std::size_t s = 0; s < env.state_count(); ++s) {
    const auto& cov = env.coverage(s);
    bool all_covered = true;
    for (std::size_t i = 0; i < 3; ++i) {
      bool any = false;
      for (std::size_t j = 0; j < 3; ++j) any = any || cov(i, j);
      all_covered = all_covered && any;
    }
    CHECK(phy::check_feasible(plan, c.phy, cov) == all_covered);
  }
}

TEST_CASE("policy result aggregates per-VU reward") {
  Environment env(ScenarioConfig{}, 2);
  const auto res = genie_policy(env, genie_table(env));
  double total = 0.0;
  for (double r : res.rewards) total += r;
  CHECK(res.per_vu_reward == doctest::Approx(total / (129.0 * 3.0)));
  for (std::size_t s = 0; s < env.state_count(); ++s) REQUIRE(res.actions[s]);
}

}
