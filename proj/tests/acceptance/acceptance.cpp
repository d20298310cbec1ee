// One PASS/FAIL line per acceptance criterion; exit status is nonzero when
// any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <tuple>

#include "vcell/harness.hpp"
#include "vcell/units.hpp"

using namespace vcell;
using namespace vcell::harness;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      if (!detail.empty()) detail += "; ";
      detail += what;
    }
  }
};

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

bool rel_close(double a, double b, double tol) {
  return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

ExperimentConfig reference_config() {
  ExperimentConfig c;
  c.scenario.phy.gamma_min_db = {10.0};
  c.scenario.aps.coverage_radius_m = 250.0;
  c.scenario.actions.mode = ActionMode::PerApUniform;
  c.learning.curve_interval = 10;
  c.test_episodes = 250;
  c.seeds = {1};
  return c;
}

// Small frozen instance: 2 APs, 2 VUs, 2 levels, 19 states.
Outcome oracle_equivalence() {
  ScenarioConfig s;
  s.road.lane_count = 2;
  s.road.timestep_s = 0.7;
  s.drop.vu_count = 2;
  s.aps.x_m = {150.0, 350.0};
  s.actions.levels_dbm = {10.0, 20.0};
  s.actions.mode = ActionMode::PerPair;
  agents::LearningConfig l;
  l.episodes = 5000;

  Outcome o;
  std::size_t matched = 0;
  std::size_t states = 0;
  for (std::uint64_t seed : {1, 2, 3}) {
    Environment env(s, seed);
    o.require(env.state_count() <= 20, "more than 20 states");
    const auto res = agents::train_sarl(env, l, seed);
    const auto policy = agents::greedy_policy(res.table);
    for (std::size_t st = 0; st < env.state_count(); ++st) {
      const auto g = baselines::genie_search(env, st);
      const double best = g ? g->reward : 0.0;
      if (rel_close(env.reward_at(st, policy[st], 0), best, 1e-12)) ++matched;
      ++states;
    }
  }
  const double frac = static_cast<double>(matched) / static_cast<double>(states);
  o.require(frac >= 0.99, "match fraction " + fmt(frac));
  o.detail = "matched " + std::to_string(matched) + "/" + std::to_string(states) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

struct ReferenceRuns {
  std::map<Solver, RunResult> runs;
};

ReferenceRuns reference_runs() {
  ReferenceRuns out;
  for (Solver s : {Solver::Genie, Solver::Sarl, Solver::SarlMarl, Solver::Marl, Solver::Equal,
                   Solver::Random}) {
    ExperimentConfig c = reference_config();
    c.solver = s;
    c.learning.episodes = s == Solver::SarlMarl ? 25000 : 100000;
    out.runs.emplace(s, run_once(c, 1));
  }
  return out;
}

double per_vu(const ReferenceRuns& p, Solver s) { return p.runs.at(s).summary.avg_per_vu_reward; }

Outcome ratio_reproduction(const ReferenceRuns& p) {
  Outcome o;
  const double genie = per_vu(p, Solver::Genie);
  const double sarl = per_vu(p, Solver::Sarl);
  const double sm = per_vu(p, Solver::SarlMarl);
  const auto& sm_train = *p.runs.at(Solver::SarlMarl).training;
  const auto& sarl_train = *p.runs.at(Solver::Sarl).training;
  o.require(sarl >= 0.95 * genie, "SARL ratio " + fmt(sarl / genie));
  o.require(sm >= 0.95 * genie, "SARL-MARL ratio " + fmt(sm / genie));
  o.require(4 * sm_train.episodes <= sarl_train.episodes, "SARL-MARL budget above 25%");
  auto ett = [](const TrainingInfo& t) {
    return t.episodes_to_threshold ? std::to_string(*t.episodes_to_threshold) : std::string("none");
  };
  o.detail = "genie " + fmt(genie) + ", sarl " + fmt(sarl) + " (" + fmt(sarl / genie) +
             "), sarl_marl " + fmt(sm) + " (" + fmt(sm / genie) + ") after " +
             std::to_string(sm_train.episodes) + " vs " + std::to_string(sarl_train.episodes) +
             " episodes; 95% reached at " + ett(sm_train) + " / " + ett(sarl_train) +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome baseline_ordering(const ReferenceRuns& p) {
  Outcome o;
  const double genie = per_vu(p, Solver::Genie);
  const double base = std::max(per_vu(p, Solver::Equal), per_vu(p, Solver::Random));
  std::string d = "genie " + fmt(genie) + ", equal " + fmt(per_vu(p, Solver::Equal)) +
                  ", random " + fmt(per_vu(p, Solver::Random));
  for (Solver s : {Solver::Sarl, Solver::Marl, Solver::SarlMarl}) {
    const double v = per_vu(p, s);
    d += ", " + std::string(solver_name(s)) + " " + fmt(v);
    o.require(v <= genie * (1.0 + 1e-12), std::string(solver_name(s)) + " above genie");
    o.require(v >= 0.99 * base, std::string(solver_name(s)) + " below baselines");
  }
  o.detail = d + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome fairness_floor(const ReferenceRuns& p) {
  Outcome o;
  const auto phy = reference_config().scenario.phy;
  std::size_t checked = 0;
  double lowest = INFINITY;
  for (const auto& [solver, run] : p.runs)
    for (const auto& step : run.log.steps) {
      if (!(step.reward > 0.0)) continue;
      ++checked;
      for (std::size_t i = 0; i < step.rate.size(); ++i) {
        const double floor = phy::rate(phy.gamma_min_linear(i), phy.kappa);
        lowest = std::min(lowest, step.rate[i]);
        if (!(step.rate[i] >= floor)) {
          o.require(false, std::string(solver_name(solver)) + " step " +
                               std::to_string(step.step) + " rate " + fmt(step.rate[i]));
          break;
        }
      }
    }
  o.require(checked > 0, "no nonzero-reward steps");
  o.detail = std::to_string(checked) + " steps, lowest rate " + fmt(lowest) + " vs floor " +
             fmt(phy::rate(db_to_linear(10.0), 0.1)) + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

Outcome sinr_sweep() {
  ExperimentConfig c = reference_config();
  c.solver = Solver::Genie;
  const auto rows = sweep_sinr_threshold(c, {6, 8, 10, 12, 14}, {Solver::Genie});
  Outcome o;
  std::string d;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    d += (k ? ", " : "") + fmt(rows[k].parameter) + " dB: " + fmt(rows[k].wsr) + "/" +
         fmt(rows[k].success_probability);
    if (k == 0) continue;
    o.require(rows[k].wsr <= rows[k - 1].wsr, "WSR rises at " + fmt(rows[k].parameter));
    o.require(rows[k].success_probability <= rows[k - 1].success_probability,
              "success rises at " + fmt(rows[k].parameter));
  }
  o.detail = d + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

// Per-pair grid with OFF added per slot, so a wider radius only enlarges the
// feasible set.
Outcome radius_sweep() {
  ExperimentConfig c = reference_config();
  c.solver = Solver::Genie;
  c.scenario.actions.mode = ActionMode::PerPair;
  c.scenario.actions.association_search = true;
  c.scenario.actions.levels_dbm = {5, 10, 15, 20};
  c.test_episodes = 1;
  const auto rows = sweep_coverage_radius(c, {100, 150, 200, 250, 300}, {Solver::Genie});
  Outcome o;
  std::string d;
  for (std::size_t k = 0; k < rows.size(); ++k) {
    d += (k ? ", " : "") + fmt(rows[k].parameter) + " m: " + fmt(rows[k].wsr);
    if (k > 0) o.require(rows[k].wsr >= rows[k - 1].wsr, "WSR drops at " + fmt(rows[k].parameter));
  }
  o.detail = d + (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

Outcome invariants() {
  Outcome o;

  // Beam norms.
  {
    std::mt19937_64 gen(11);
    std::normal_distribution<double> n(0.0, 1.0);
    std::uniform_real_distribution<double> p(0.01, 400.0);
    double worst = 0.0;
    for (int k = 0; k < 2000; ++k) {
      channel::ComplexVector h(8);
      for (auto& x : h) x = {n(gen) * 1e-6, n(gen) * 1e-6};
      const double power = p(gen);
      worst = std::max(worst, std::abs(phy::squared_norm(phy::beam_vector(h, power)) - power) / power);
    }
    o.require(worst <= 1e-12, "beam norm error " + fmt(worst));
  }

  // Training with the update log, then log recomputation.
  ExperimentConfig c = reference_config();
  c.solver = Solver::SarlMarl;
  c.learning.episodes = 400;
  c.test_episodes = 5;
  c.scenario.phy.gamma_min_db = {5.0};
  std::vector<agents::UpdateRecord> updates;
  const auto logged = run_once(c, 3, [&](const agents::UpdateRecord& u) { updates.push_back(u); });

  std::stringstream ss;
  write_log(ss, logged.log);
  const EpisodeLog log = read_log(ss);
  Environment env(c.scenario, 3);
  std::size_t log_errors = 0;
  for (const auto& s : log.steps) {
    const auto e = env.evaluate_at(s.state, env.actions().plan(static_cast<std::size_t>(s.action)), 0);
    for (std::size_t i = 0; i < log.vu_count; ++i) {
      const double sinr = db_to_linear(s.sinr_db[i]);
      if (!rel_close(sinr, e.metrics.sinr[i], 1e-9)) ++log_errors;
      if (!rel_close(phy::rate(sinr, c.scenario.phy.kappa), s.rate[i], 1e-9)) ++log_errors;
      if (!rel_close(phy::backhaul_consumption(s.serving[i], s.rate[i]), e.metrics.backhaul[i], 1e-9))
        ++log_errors;
    }
    if (!rel_close(recompute_reward(s, c.scenario.phy), s.reward, 1e-9)) ++log_errors;
  }
  o.require(log_errors == 0, std::to_string(log_errors) + " log recomputation mismatches");
  const auto m = summarize(log);
  o.require(rel_close(m.wsr, logged.summary.wsr, 1e-12), "summary differs from the log");

  // Closed-form replay: each update follows the formula and picks up the
  // value the previous update to the same entry left behind.
  std::map<std::tuple<std::size_t, std::size_t, std::size_t>, double> last;
  std::size_t replay_errors = 0;
  for (const auto& u : updates) {
    const double expect =
        (1.0 - u.alpha) * u.q_old + u.alpha * (u.reward + u.discount * (u.terminal ? 0.0 : u.max_next));
    if (!rel_close(expect, u.q_new, 1e-12)) ++replay_errors;
    if (u.terminal && u.max_next != 0.0) ++replay_errors;
    const auto key = std::make_tuple(u.agent, u.state, u.action);
    if (auto it = last.find(key); it != last.end() && it->second != u.q_old) ++replay_errors;
    last[key] = u.q_new;
  }
  o.require(!updates.empty() && replay_errors == 0,
            std::to_string(replay_errors) + " replay mismatches over " + std::to_string(updates.size()));

  // Partitions.
  for (std::size_t n : {1, 2, 4, 8, 16, 64}) {
    const auto parts = agents::partition_actions(64, n);
    std::vector<int> hits(64, 0);
    for (const auto& r : parts)
      for (std::size_t a = r.begin; a < r.end; ++a) ++hits[a];
    o.require(parts.size() == n && std::all_of(hits.begin(), hits.end(), [](int h) { return h == 1; }),
              "partition of 64 into " + std::to_string(n));
  }

  // Register monotonicity: the stored reward never falls, and after training
  // it is the frozen reward of the stored action.
  {
    Rng rng(5);
    agents::CentralRegister reg(4, 64, rng);
    std::uniform_real_distribution<double> r(0.0, 10.0);
    bool monotone = true;
    for (std::size_t s = 0; s < 4; ++s) reg.record_initial(s, 0.0);
    for (int k = 0; k < 4000; ++k) {
      const std::size_t s = static_cast<std::size_t>(k % 4);
      const double before = reg.best_reward(s);
      const double offered = r(rng);
      const bool took = reg.offer(s, static_cast<std::size_t>(k % 64), offered);
      monotone = monotone && reg.best_reward(s) >= before && took == (offered > before);
    }
    o.require(monotone, "register not monotone");

    Environment e2(c.scenario, 3);
    agents::LearningConfig l = c.learning;
    const auto trained = agents::train_sarl_marl(e2, l, 3);
    bool consistent = true;
    for (std::size_t s = 0; s < e2.state_count(); ++s)
      if (trained.central.evaluated(s))
        consistent = consistent && trained.central.best_reward(s) ==
                                       e2.reward_at(s, trained.central.action(s), 0);
    o.require(consistent, "register reward differs from the stored action's reward");
  }

  // Byte-identical outputs.
  {
    const auto base = std::filesystem::temp_directory_path() / "vcell_acceptance_seed";
    std::filesystem::remove_all(base);
    ExperimentConfig d = c;
    d.record_updates = true;
    d.seeds = {7, 8};
    run(d, base / "a");
    run(d, base / "b");
    std::size_t same = 0, total = 0;
    for (const auto& e : std::filesystem::directory_iterator(base / "a")) {
      ++total;
      if (slurp(e.path()) == slurp(base / "b" / e.path().filename())) ++same;
    }
    o.require(total > 0 && same == total, "non-identical outputs " + std::to_string(total - same));
    std::filesystem::remove_all(base);
  }

  o.detail = std::to_string(updates.size()) + " updates replayed, " +
             std::to_string(log.steps.size()) + " log steps recomputed" +
             (o.detail.empty() ? "" : "; " + o.detail);
  return o;
}

template <class F>
bool report(int id, const char* name, F&& f) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = f();
  } catch (const std::exception& e) {
    o.pass = false;
    o.detail = std::string("exception: ") + e.what();
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  std::printf("%s criterion %d (%s) [%.1fs]: %s\n", o.pass ? "PASS" : "FAIL", id, name, secs,
              o.detail.c_str());
  std::fflush(stdout);
  return o.pass;
}

}  // namespace

int main() {
  bool ok = true;
  ok &= report(1, "oracle equivalence", oracle_equivalence);

  const auto t0 = std::chrono::steady_clock::now();
  ReferenceRuns p;
  std::string error;
  try {
    p = reference_runs();
  } catch (const std::exception& e) {
    error = e.what();
  }
  std::printf("full-scale runs took %.1fs\n",
              std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count());
  auto guarded = [&](auto f) {
    return [&, f]() {
      if (!error.empty()) return Outcome{false, "full-scale runs failed: " + error};
      return f(p);
    };
  };
  ok &= report(2, "ratio reproduction", guarded(ratio_reproduction));
  ok &= report(3, "baseline ordering", guarded(baseline_ordering));
  ok &= report(4, "fairness floor", guarded(fairness_floor));
  ok &= report(5, "SINR threshold sweep", sinr_sweep);
  ok &= report(6, "coverage radius sweep", radius_sweep);
  ok &= report(7, "invariant suite", invariants);
  return ok ? 0 : 1;
}
