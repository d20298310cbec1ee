#include "vcell/agents.hpp"

#include <limits>
#include <random>
#include <stdexcept>

namespace vcell::agents {

void LearningConfig::validate(FieldErrors& errors) const {
  errors.require(discount >= 0.0 && discount < 1.0, "learning.discount", "must be in [0, 1)");
  errors.require(alpha_start >= 0.0 && alpha_start <= 1.0, "learning.alpha_start", "must be in [0, 1]");
  errors.require(alpha_end >= 0.0 && alpha_end <= 1.0, "learning.alpha_end", "must be in [0, 1]");
  errors.require(alpha_start >= alpha_end, "learning.alpha_end", "must not exceed alpha_start");
  errors.require(epsilon_start >= 0.0 && epsilon_start <= 1.0, "learning.epsilon_start",
                 "must be in [0, 1]");
  errors.require(epsilon_end >= 0.0 && epsilon_end <= 1.0, "learning.epsilon_end", "must be in [0, 1]");
  errors.require(epsilon_start >= epsilon_end, "learning.epsilon_end", "must not exceed epsilon_start");
  errors.require(episodes >= 1, "learning.episodes", "must be >= 1");
  errors.require(agents >= 1, "learning.agents", "must be >= 1");
}

double linear_schedule(std::size_t episode, std::size_t total, double start, double end) {
  if (total <= 1) return start;
  return start + (end - start) * static_cast<double>(episode) / static_cast<double>(total - 1);
}

QTable::QTable(std::size_t states, std::size_t actions, double fill)
    : states_(states), actions_(actions), values_(states * actions, fill) {}

QTable QTable::random(std::size_t states, std::size_t actions, Rng& rng) {
  QTable t(states, actions);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (auto& v : t.values_) v = u(rng);
  return t;
}

double QTable::max(std::size_t s) const { return at(s, argmax(s)); }

std::size_t QTable::argmax(std::size_t s) const { return agents::argmax(row(s)); }

double q_update(double q, double reward, double max_next, double alpha, double discount) {
  return (1.0 - alpha) * q + alpha * (reward + discount * max_next);
}

double marl_update(double q, double joint_reward, double max_next, double alpha, double discount) {
  return q_update(q, joint_reward, max_next, alpha, discount);
}

std::size_t argmax(std::span<const double> values) {
  if (values.empty()) throw std::domain_error("argmax: empty row");
  std::size_t best = 0;
  for (std::size_t a = 1; a < values.size(); ++a)
    if (values[a] > values[best]) best = a;
  return best;
}

bool explore_draw(double epsilon, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  return u(rng) < epsilon;
}

std::size_t uniform_index(std::size_t n, Rng& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, n - 1);
  return pick(rng);
}

std::size_t epsilon_greedy(std::span<const double> row, double epsilon, Rng& rng) {
  if (row.empty()) throw std::domain_error("epsilon_greedy: empty row");
  if (explore_draw(epsilon, rng)) return uniform_index(row.size(), rng);
  return argmax(row);
}

std::vector<std::size_t> marl_joint_action(const std::vector<std::span<const double>>& rows,
                                           double epsilon, Rng& rng) {
  if (rows.empty()) throw std::domain_error("marl_joint_action: no agents");
  const std::size_t n = rows.front().size();
  for (const auto& r : rows)
    if (r.size() != n || n == 0) throw std::domain_error("marl_joint_action: mismatched rows");

  std::vector<double> summed(n, 0.0);
  for (const auto& r : rows)
    for (std::size_t a = 0; a < n; ++a) summed[a] += r[a];
  const std::size_t joint_best = argmax(summed);

  std::vector<std::size_t> out(rows.size());
  for (auto& choice : out) choice = explore_draw(epsilon, rng) ? uniform_index(n, rng) : joint_best;
  return out;
}

std::vector<IndexRange> partition_actions(std::size_t action_count, std::size_t n) {
  if (n == 0 || action_count == 0 || action_count % n != 0)
    throw ConfigError("learning.agents", "agent count must divide the action count");
  const std::size_t block = action_count / n;
  std::vector<IndexRange> parts(n);
  for (std::size_t l = 0; l < n; ++l) parts[l] = {l * block, (l + 1) * block};
  return parts;
}

CentralRegister::CentralRegister(std::size_t states, std::size_t actions, Rng& rng)
    : actions_(states),
      rewards_(states, -std::numeric_limits<double>::infinity()),
      evaluated_(states, 0) {
  for (auto& a : actions_) a = uniform_index(actions, rng);
}

void CentralRegister::record_initial(std::size_t s, double reward) {
  if (evaluated_.at(s)) return;
  evaluated_[s] = 1;
  rewards_[s] = reward;
}

bool CentralRegister::offer(std::size_t s, std::size_t action, double reward) {
  if (!(reward > rewards_.at(s))) return false;
  actions_[s] = action;
  rewards_[s] = reward;
  evaluated_[s] = 1;
  return true;
}

bool central_update(CentralRegister& reg, std::size_t state, std::size_t action, double reward) {
  return reg.offer(state, action, reward);
}

std::vector<std::size_t> greedy_policy(const QTable& table) {
  std::vector<std::size_t> out(table.states());
  for (std::size_t s = 0; s < table.states(); ++s) out[s] = table.argmax(s);
  return out;
}

std::vector<std::uint64_t> marl_greedy_codes(const std::vector<QTable>& tables,
                                             const ActionSet& actions) {
  const std::size_t states = tables.front().states();
  std::vector<std::uint64_t> out(states);
  Rng unused(0);
  for (std::size_t s = 0; s < states; ++s) {
    std::vector<std::span<const double>> rows;
    for (const auto& t : tables) rows.push_back(t.row(s));
    const auto joint = marl_joint_action(rows, 0.0, unused);
    out[s] = actions.compose(std::vector<std::uint64_t>(joint.begin(), joint.end()));
  }
  return out;
}

namespace {

std::uint64_t value_draw(const Environment& env) { return env.frozen() ? 0 : kMonteCarloDrawBase; }

double per_vu(const Environment& env, double total) {
  return total / static_cast<double>(env.state_count() * env.config().vu_count());
}

}  // namespace

double policy_value(const Environment& env, const std::vector<phy::PowerPlan>& plans) {
  double total = 0.0;
  for (std::size_t s = 0; s < env.state_count(); ++s)
    total += env.evaluate_at(s, plans.at(s), value_draw(env)).reward;
  return per_vu(env, total);
}

double policy_value(const Environment& env, const std::vector<std::size_t>& dense_actions) {
  double total = 0.0;
  for (std::size_t s = 0; s < env.state_count(); ++s)
    total += env.reward_at(s, dense_actions.at(s), value_draw(env));
  return per_vu(env, total);
}

namespace {

struct EpisodeParams {
  double epsilon;
  double alpha;
};

EpisodeParams params_for(std::size_t episode, const LearningConfig& config) {
  return {linear_schedule(episode, config.episodes, config.epsilon_start, config.epsilon_end),
          linear_schedule(episode, config.episodes, config.alpha_start, config.alpha_end)};
}

bool wants_curve(const LearningConfig& config, std::size_t episode) {
  if (config.curve_interval == 0) return false;
  return (episode + 1) % config.curve_interval == 0 || episode + 1 == config.episodes;
}

void validate_or_throw(const LearningConfig& config) {
  FieldErrors errors;
  config.validate(errors);
  errors.throw_if_any();
}

// Applies one update to `table` and streams it.
void apply_update(QTable& table, const UpdateSink& sink, UpdateRecord rec) {
  rec.q_old = table.at(rec.state, rec.action);
  rec.q_new = q_update(rec.q_old, rec.reward, rec.max_next, rec.alpha, rec.discount);
  table.at(rec.state, rec.action) = rec.q_new;
  if (sink) sink(rec);
}

}  // namespace

SarlResult train_sarl(Environment& env, const LearningConfig& config, std::uint64_t seed,
                      const UpdateSink& sink) {
  validate_or_throw(config);
  Rng rng = make_rng(seed, Stream::Agents);
  SarlResult result{QTable::random(env.state_count(), env.action_count(), rng), {}};
  QTable& q = result.table;
  const double vus = static_cast<double>(env.config().vu_count());

  for (std::size_t e = 0; e < config.episodes; ++e) {
    const auto p = params_for(e, config);
    StateIndex s = env.reset(e);
    double total = 0.0;
    std::size_t steps = 0;
    while (!env.done()) {
      const std::size_t a = epsilon_greedy(q.row(s.bin), p.epsilon, rng);
      const double r = env.reward(a);
      const StateIndex next = env.transition();
      const double max_next = next.terminal ? 0.0 : q.max(next.bin);
      apply_update(q, sink,
                   {e, steps, 0, s.bin, a, r, max_next, 0.0, 0.0, p.epsilon, p.alpha,
                    config.discount, next.terminal});
      total += r;
      ++steps;
      s = next;
    }
    result.curve.behaviour.push_back(steps ? total / (static_cast<double>(steps) * vus) : 0.0);
    if (wants_curve(config, e))
      result.curve.greedy.push_back({e, policy_value(env, greedy_policy(q))});
  }
  return result;
}

namespace {

double joint_reward(const Environment& env, std::uint64_t raw) {
  const auto& actions = env.actions();
  if (auto dense = actions.dense_index(raw)) return env.reward(*dense);
  return env.evaluate(actions.plan_from_raw(raw)).reward;
}

std::vector<phy::PowerPlan> plans_from_codes(const ActionSet& actions,
                                             const std::vector<std::uint64_t>& codes) {
  std::vector<phy::PowerPlan> plans;
  plans.reserve(codes.size());
  for (auto c : codes) plans.push_back(actions.plan_from_raw(c));
  return plans;
}

}  // namespace

MarlResult train_marl(Environment& env, const LearningConfig& config, std::uint64_t seed,
                      const UpdateSink& sink) {
  validate_or_throw(config);
  const auto& actions = env.actions();
  const std::size_t n_agents = actions.ap_count();
  const auto sub = static_cast<std::size_t>(actions.sub_action_count());

  Rng rng = make_rng(seed, Stream::Agents);
  MarlResult result;
  for (std::size_t n = 0; n < n_agents; ++n)
    result.tables.push_back(QTable::random(env.state_count(), sub, rng));
  const double vus = static_cast<double>(env.config().vu_count());

  std::vector<std::span<const double>> rows(n_agents);
  for (std::size_t e = 0; e < config.episodes; ++e) {
    const auto p = params_for(e, config);
    StateIndex s = env.reset(e);
    double total = 0.0;
    std::size_t steps = 0;
    while (!env.done()) {
      for (std::size_t n = 0; n < n_agents; ++n) rows[n] = result.tables[n].row(s.bin);
      const auto joint = marl_joint_action(rows, p.epsilon, rng);
      const std::uint64_t raw = actions.compose(std::vector<std::uint64_t>(joint.begin(), joint.end()));
      const double r = joint_reward(env, raw);
      const StateIndex next = env.transition();
      for (std::size_t n = 0; n < n_agents; ++n) {
        QTable& q = result.tables[n];
        const double max_next = next.terminal ? 0.0 : q.max(next.bin);
        UpdateRecord rec{e, steps, n, s.bin, joint[n], r, max_next, 0.0, 0.0, p.epsilon,
                         p.alpha, config.discount, next.terminal};
        rec.q_old = q.at(s.bin, joint[n]);
        rec.q_new = marl_update(rec.q_old, r, max_next, p.alpha, config.discount);
        q.at(s.bin, joint[n]) = rec.q_new;
        if (sink) sink(rec);
      }
      total += r;
      ++steps;
      s = next;
    }
    result.curve.behaviour.push_back(steps ? total / (static_cast<double>(steps) * vus) : 0.0);
    if (wants_curve(config, e))
      result.curve.greedy.push_back(
          {e, policy_value(env, plans_from_codes(actions, marl_greedy_codes(result.tables, actions)))});
  }
  return result;
}

SarlMarlResult train_sarl_marl(Environment& env, const LearningConfig& config, std::uint64_t seed,
                               const UpdateSink& sink) {
  validate_or_throw(config);
  SarlMarlResult result;
  result.partitions = partition_actions(env.action_count(), config.agents);
  const std::size_t block = result.partitions.front().size();

  Rng rng = make_rng(seed, Stream::Agents);
  for (std::size_t l = 0; l < config.agents; ++l)
    result.tables.push_back(QTable::random(env.state_count(), block, rng));
  Rng register_rng = make_rng(seed, Stream::Register);
  result.central = CentralRegister(env.state_count(), env.action_count(), register_rng);
  CentralRegister& central = result.central;
  const double vus = static_cast<double>(env.config().vu_count());

  struct Choice {
    std::size_t local;
    double reward;
  };
  std::vector<Choice> choices(config.agents);

  for (std::size_t e = 0; e < config.episodes; ++e) {
    const auto p = params_for(e, config);
    StateIndex s = env.reset(e);
    double total = 0.0;
    std::size_t steps = 0;
    while (!env.done()) {
      if (!central.evaluated(s.bin)) central.record_initial(s.bin, env.reward(central.action(s.bin)));

      // Every agent acts on the same state within its own block.
      for (std::size_t l = 0; l < config.agents; ++l) {
        const auto& part = result.partitions[l];
        const std::size_t local = epsilon_greedy(result.tables[l].row(s.bin), p.epsilon, rng);
        const double r = env.reward(part.begin + local);
        central_update(central, s.bin, part.begin + local, r);
        choices[l] = {local, r};
      }

      // The register's best action drives the transition.
      total += env.reward(central.action(s.bin));
      const StateIndex next = env.transition();

      for (std::size_t l = 0; l < config.agents; ++l) {
        QTable& q = result.tables[l];
        const double max_next = next.terminal ? 0.0 : q.max(next.bin);
        apply_update(q, sink,
                     {e, steps, l, s.bin, choices[l].local, choices[l].reward, max_next, 0.0, 0.0,
                      p.epsilon, p.alpha, config.discount, next.terminal});
      }
      ++steps;
      s = next;
    }
    result.curve.behaviour.push_back(steps ? total / (static_cast<double>(steps) * vus) : 0.0);
    if (wants_curve(config, e)) result.curve.greedy.push_back({e, policy_value(env, central.policy())});
  }
  return result;
}

}  // namespace vcell::agents
