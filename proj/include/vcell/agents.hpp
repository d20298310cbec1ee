#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "vcell/environment.hpp"
#include "vcell/errors.hpp"
#include "vcell/rng.hpp"

namespace vcell::agents {

struct LearningConfig {
  double discount = 0.8;
  double alpha_start = 1.0;
  double alpha_end = 0.01;
  double epsilon_start = 1.0;
  double epsilon_end = 0.01;
  std::size_t episodes = 100000;
  // Number of action-space partitions for the distributed learner.
  std::size_t agents = 4;
  // Evaluate the greedy policy every k episodes for the learning curve; 0
  // disables the curve.
  std::size_t curve_interval = 0;

  void validate(FieldErrors& errors) const;
};

// start + (end - start) * episode / (total - 1); a single episode stays at start.
double linear_schedule(std::size_t episode, std::size_t total, double start, double end);

class QTable {
 public:
  QTable() = default;
  QTable(std::size_t states, std::size_t actions, double fill = 0.0);

  // Uniform [0, 1) entries.
  static QTable random(std::size_t states, std::size_t actions, Rng& rng);

  std::size_t states() const noexcept { return states_; }
  std::size_t actions() const noexcept { return actions_; }

  double& at(std::size_t s, std::size_t a) { return values_[s * actions_ + a]; }
  double at(std::size_t s, std::size_t a) const { return values_[s * actions_ + a]; }
  std::span<const double> row(std::size_t s) const { return {values_.data() + s * actions_, actions_}; }

  double max(std::size_t s) const;
  std::size_t argmax(std::size_t s) const;

  const std::vector<double>& values() const noexcept { return values_; }
  friend bool operator==(const QTable&, const QTable&) = default;

 private:
  std::size_t states_ = 0;
  std::size_t actions_ = 0;
  std::vector<double> values_;
};

// (1 - alpha) q + alpha (r + discount * max_next)
double q_update(double q, double reward, double max_next, double alpha, double discount);
// Per-agent update driven by the shared joint reward; same functional form.
double marl_update(double q, double joint_reward, double max_next, double alpha, double discount);

// Lowest index among the maxima.
std::size_t argmax(std::span<const double> values);

bool explore_draw(double epsilon, Rng& rng);
std::size_t uniform_index(std::size_t n, Rng& rng);

std::size_t epsilon_greedy(std::span<const double> row, double epsilon, Rng& rng);

// Cooperative joint action: every exploiting agent takes the argmax of the
// summed rows; exploring agents draw uniformly.
std::vector<std::size_t> marl_joint_action(const std::vector<std::span<const double>>& rows,
                                           double epsilon, Rng& rng);

struct IndexRange {
  std::size_t begin = 0;
  std::size_t end = 0;

  std::size_t size() const noexcept { return end - begin; }
  bool contains(std::size_t i) const noexcept { return i >= begin && i < end; }
};

// Contiguous equal blocks; throws ConfigError unless n divides action_count.
std::vector<IndexRange> partition_actions(std::size_t action_count, std::size_t n);

// Best action seen so far in each state and the reward it earned.
class CentralRegister {
 public:
  CentralRegister() = default;
  // Random initial action per state; rewards are unknown until first seen.
  CentralRegister(std::size_t states, std::size_t actions, Rng& rng);

  std::size_t states() const noexcept { return actions_.size(); }
  std::size_t action(std::size_t s) const { return actions_.at(s); }
  double best_reward(std::size_t s) const { return rewards_.at(s); }
  bool evaluated(std::size_t s) const { return evaluated_.at(s) != 0; }

  // Records the reward earned by the stored action on its first evaluation.
  void record_initial(std::size_t s, double reward);

  // Replaces the stored action iff `reward` strictly exceeds the stored one.
  bool offer(std::size_t s, std::size_t action, double reward);

  const std::vector<std::size_t>& policy() const noexcept { return actions_; }

 private:
  std::vector<std::size_t> actions_;
  std::vector<double> rewards_;
  std::vector<char> evaluated_;
};

bool central_update(CentralRegister& reg, std::size_t state, std::size_t action, double reward);

// One Q-table update, streamed for logging and replay.
struct UpdateRecord {
  std::size_t episode = 0;
  std::size_t step = 0;
  std::size_t agent = 0;
  std::size_t state = 0;
  std::size_t action = 0;  // index within the agent's own table
  double reward = 0.0;
  double max_next = 0.0;
  double q_old = 0.0;
  double q_new = 0.0;
  double epsilon = 0.0;
  double alpha = 0.0;
  double discount = 0.0;
  bool terminal = false;
};

using UpdateSink = std::function<void(const UpdateRecord&)>;

struct GreedyPoint {
  std::size_t episode = 0;
  double per_vu_reward = 0.0;
};

struct TrainingCurve {
  // Mean per-VU reward of the transitions actually taken in each episode.
  std::vector<double> behaviour;
  // Greedy policy value averaged over all states, sampled every curve_interval.
  std::vector<GreedyPoint> greedy;
};

struct SarlResult {
  QTable table;
  TrainingCurve curve;
};

struct MarlResult {
  std::vector<QTable> tables;  // one per AP
  TrainingCurve curve;
};

struct SarlMarlResult {
  CentralRegister central;
  std::vector<QTable> tables;
  std::vector<IndexRange> partitions;
  TrainingCurve curve;
};

SarlResult train_sarl(Environment& env, const LearningConfig& config, std::uint64_t seed,
                      const UpdateSink& sink = {});
MarlResult train_marl(Environment& env, const LearningConfig& config, std::uint64_t seed,
                      const UpdateSink& sink = {});
SarlMarlResult train_sarl_marl(Environment& env, const LearningConfig& config, std::uint64_t seed,
                               const UpdateSink& sink = {});

// Greedy dense action per state.
std::vector<std::size_t> greedy_policy(const QTable& table);
// Greedy joint raw code per state for the per-AP agents.
std::vector<std::uint64_t> marl_greedy_codes(const std::vector<QTable>& tables,
                                             const ActionSet& actions);

// Mean per-VU reward of a per-state plan over every state bin, evaluated on
// the frozen channel (or one fixed Monte Carlo draw in stochastic mode).
double policy_value(const Environment& env, const std::vector<phy::PowerPlan>& plans);
double policy_value(const Environment& env, const std::vector<std::size_t>& dense_actions);

}  // namespace vcell::agents
