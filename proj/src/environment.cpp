#include "vcell/environment.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include "vcell/rng.hpp"

namespace vcell {

namespace {

// Largest frozen-mode reward table kept in memory (entries).
constexpr std::size_t kRewardCacheLimit = std::size_t{1} << 22;

}  // namespace

Environment::Environment(ScenarioConfig config, std::uint64_t seed)
    : Environment(std::move(config), seed, ChannelProvider{}) {}

Environment::Environment(ScenarioConfig config, std::uint64_t seed, ChannelProvider provider)
    : config_(std::move(config)), seed_(seed), provider_(std::move(provider)) {
  FieldErrors errors;
  config_.validate(errors);
  errors.require(config_.drop.mode == mobility::DropMode::CommonX, "drop.mode",
                 "the tabular environment needs the common-x drop");
  errors.throw_if_any();

  actions_ = std::make_shared<const ActionSet>(actionspace::build_action_space(config_));
  aps_ = mobility::place_aps(config_.aps);
  bins_ = mobility::bin_count(config_.road);
  coverage_cache_.resize(bins_);
  frozen_gains_.resize(bins_);
  if (frozen() && bins_ * actions_->size() <= kRewardCacheLimit)
    reward_cache_.assign(bins_ * actions_->size(), std::numeric_limits<double>::quiet_NaN());
}

mobility::VehicleState Environment::geometry(std::size_t bin) const {
  return mobility::convoy_at(static_cast<double>(bin) * config_.road.displacement_m(),
                             config_.vu_count());
}

const channel::Coverage& Environment::coverage(std::size_t bin) const {
  auto& slot = coverage_cache_.at(bin);
  if (!slot) slot = channel::coverage_of(geometry(bin), config_.road, aps_);
  return *slot;
}

channel::ChannelRealization Environment::channel(std::size_t bin, std::uint64_t draw) const {
  if (frozen()) draw = 0;
  if (provider_) return provider_(bin, draw);
  return channel::draw_channel(geometry(bin), config_.road, aps_, bin, seed_, config_.channel, draw);
}

const phy::LinkGains& Environment::gains(std::size_t bin, std::uint64_t draw) const {
  if (frozen()) {
    auto& slot = frozen_gains_.at(bin);
    if (!slot) slot = std::make_unique<phy::LinkGains>(channel(bin, 0));
    return *slot;
  }
  if (!live_gains_ || live_bin_ != bin || live_draw_ != draw) {
    live_gains_ = std::make_unique<phy::LinkGains>(channel(bin, draw));
    live_bin_ = bin;
    live_draw_ = draw;
  }
  return *live_gains_;
}

std::optional<std::size_t> Environment::successor(std::size_t bin) const {
  return bin + 1 < bins_ ? std::optional<std::size_t>(bin + 1) : std::nullopt;
}

StateIndex Environment::reset(std::uint64_t episode) {
  vehicles_ = mobility::drop_vehicles(config_.road, config_.drop,
                                      derive_seed(seed_, Stream::Drop, episode));
  state_ = actionspace::state_index(vehicles_, config_.road);
  done_ = state_.terminal;
  draw_ = visits_++;
  return state_;
}

Evaluation Environment::evaluate_at(std::size_t bin, const phy::PowerPlan& plan,
                                    std::uint64_t draw) const {
  const auto& cov = coverage(bin);
  Evaluation e;
  e.metrics = gains(bin, draw).metrics(plan, cov, config_.channel.noise_variance_mw,
                                       config_.phy.kappa);
  e.feasible = phy::check_feasible(plan, config_.phy, cov);
  e.success = e.feasible && phy::meets_sinr_floor(e.metrics, config_.phy);
  e.reward = e.feasible ? phy::reward(e.metrics, config_.phy) : 0.0;
  return e;
}

double Environment::reward_at(std::size_t bin, std::size_t action, std::uint64_t draw) const {
  if (action >= actions_->size()) throw std::domain_error("Environment: action index out of range");
  if (!reward_cache_.empty()) {
    double& slot = reward_cache_[bin * actions_->size() + action];
    if (std::isnan(slot)) slot = evaluate_at(bin, actions_->plan(action), draw).reward;
    return slot;
  }
  return evaluate_at(bin, actions_->plan(action), draw).reward;
}

double Environment::reward(std::size_t action) const { return reward_at(state_.bin, action, draw_); }

Evaluation Environment::evaluate(std::size_t action) const {
  if (action >= actions_->size()) throw std::domain_error("Environment: action index out of range");
  return evaluate(actions_->plan(action));
}

Evaluation Environment::evaluate(const phy::PowerPlan& plan) const {
  return evaluate_at(state_.bin, plan, draw_);
}

StateIndex Environment::transition() {
  if (done_) throw std::logic_error("Environment::transition: episode already terminated");
  auto next = mobility::advance(vehicles_, config_.road);
  StateIndex next_state{state_.bin + 1, true};
  if (next) next_state = actionspace::state_index(*next, config_.road);
  // A convoy that drifts onto the ROI boundary still terminates.
  if (!next || next_state.bin >= bins_) {
    done_ = true;
    state_ = {state_.bin + 1, true};
    return state_;
  }
  vehicles_ = std::move(*next);
  state_ = next_state;
  draw_ = visits_++;
  return state_;
}

StepOutcome Environment::finish_step(Evaluation eval) {
  StepOutcome out;
  out.state = state_;
  out.eval = std::move(eval);
  out.next = transition();
  out.done = done_;
  return out;
}

StepOutcome Environment::step(std::size_t action) {
  if (done_) throw std::logic_error("Environment::step: episode already terminated");
  if (action >= actions_->size()) throw std::domain_error("Environment: action index out of range");
  return finish_step(evaluate(action));
}

StepOutcome Environment::step(const phy::PowerPlan& plan) {
  if (done_) throw std::logic_error("Environment::step: episode already terminated");
  return finish_step(evaluate(plan));
}

}  // namespace vcell
