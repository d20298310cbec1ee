#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <vector>

#include "vcell/actionspace.hpp"
#include "vcell/channel.hpp"
#include "vcell/mobility.hpp"
#include "vcell/phy.hpp"
#include "vcell/scenario.hpp"

namespace vcell {

using actionspace::ActionSet;
using actionspace::StateIndex;

// Supplies the channel for a state bin and draw index. Used by tests to
// inject hand-built channels.
using ChannelProvider =
    std::function<channel::ChannelRealization(std::size_t bin, std::uint64_t draw)>;

struct Evaluation {
  phy::LinkMetrics metrics;
  double reward = 0.0;
  bool feasible = false;
  bool success = false;  // feasible and every VU at or above its SINR floor
};

struct StepOutcome {
  StateIndex state;
  Evaluation eval;
  StateIndex next;
  bool done = false;
};

// Draw indices at or above this value are reserved for Monte Carlo
// evaluation and never collide with per-visit draws.
inline constexpr std::uint64_t kMonteCarloDrawBase = std::uint64_t{1} << 62;
// First per-visit draw used by greedy test episodes.
inline constexpr std::uint64_t kTestDrawBase = std::uint64_t{1} << 61;

// Tabular environment over a common-x convoy: state = convoy position bin,
// action = dense index into the action set.
class Environment {
 public:
  Environment(ScenarioConfig config, std::uint64_t seed);
  Environment(ScenarioConfig config, std::uint64_t seed, ChannelProvider provider);

  const ScenarioConfig& config() const noexcept { return config_; }
  const ActionSet& actions() const noexcept { return *actions_; }
  std::size_t state_count() const noexcept { return bins_; }
  std::size_t action_count() const noexcept { return actions_->size(); }
  std::uint64_t seed() const noexcept { return seed_; }
  bool frozen() const noexcept { return config_.channel.fading == channel::FadingMode::Frozen; }

  StateIndex reset(std::uint64_t episode);
  // Restarts the per-visit draw numbering (stochastic mode), so separate
  // phases can be pinned to the same channel sequence.
  void set_next_draw(std::uint64_t next) noexcept { visits_ = next; }
  StateIndex state() const noexcept { return state_; }
  bool done() const noexcept { return done_; }
  std::uint64_t current_draw() const noexcept { return draw_; }
  const mobility::VehicleState& vehicles() const noexcept { return vehicles_; }

  StepOutcome step(std::size_t action);
  StepOutcome step(const phy::PowerPlan& plan);
  // Advances the convoy without evaluating an action; used by trainers that
  // score actions through reward().
  StateIndex transition();

  // Pure evaluations at the current state and draw.
  double reward(std::size_t action) const;
  Evaluation evaluate(std::size_t action) const;
  Evaluation evaluate(const phy::PowerPlan& plan) const;

  // Pure evaluation at any bin; `draw` is ignored in frozen mode.
  Evaluation evaluate_at(std::size_t bin, const phy::PowerPlan& plan, std::uint64_t draw) const;
  double reward_at(std::size_t bin, std::size_t action, std::uint64_t draw) const;

  mobility::VehicleState geometry(std::size_t bin) const;
  const channel::Coverage& coverage(std::size_t bin) const;
  channel::ChannelRealization channel(std::size_t bin, std::uint64_t draw) const;

  // Bin reached from `bin` after one step, or nullopt at the ROI exit.
  std::optional<std::size_t> successor(std::size_t bin) const;

  // Cached link gains; the reference stays valid until the next call with a
  // different (bin, draw) in stochastic mode.
  const phy::LinkGains& gains(std::size_t bin, std::uint64_t draw) const;

 private:
  StepOutcome finish_step(Evaluation eval);

  ScenarioConfig config_;
  std::uint64_t seed_;
  ChannelProvider provider_;
  std::shared_ptr<const ActionSet> actions_;
  mobility::ApLayout aps_;
  std::size_t bins_ = 0;

  mobility::VehicleState vehicles_;
  StateIndex state_;
  bool done_ = true;
  std::uint64_t draw_ = 0;
  std::uint64_t visits_ = 0;

  mutable std::vector<std::optional<channel::Coverage>> coverage_cache_;
  mutable std::vector<std::unique_ptr<phy::LinkGains>> frozen_gains_;
  mutable std::unique_ptr<phy::LinkGains> live_gains_;
  mutable std::size_t live_bin_ = 0;
  mutable std::uint64_t live_draw_ = 0;
  mutable std::vector<double> reward_cache_;
};

}  // namespace vcell
