#include "vcell/actionspace.hpp"

#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "vcell/units.hpp"

namespace vcell::actionspace {

std::vector<std::size_t> Association::serving_aps(std::size_t vu) const {
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < aps_; ++j)
    if (a(vu, j)) out.push_back(j);
  return out;
}

std::vector<std::size_t> Association::served_vus(std::size_t ap) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < vus_; ++i)
    if (u(ap, i)) out.push_back(i);
  return out;
}

Association association_of(const phy::PowerPlan& plan, const channel::Coverage& coverage) {
  Association assoc(plan.vu_count, plan.ap_count);
  for (std::size_t i = 0; i < plan.vu_count; ++i)
    for (std::size_t j = 0; j < plan.ap_count; ++j)
      assoc.set(i, j, coverage(i, j) && plan.at(j, i) > 0.0);
  return assoc;
}

namespace {

std::uint64_t checked_pow(std::uint64_t base, std::size_t exp) {
  std::uint64_t r = 1;
  for (std::size_t k = 0; k < exp; ++k) {
    if (r > std::numeric_limits<std::uint64_t>::max() / base)
      throw ConfigError("actions", "action space too large to enumerate");
    r *= base;
  }
  return r;
}

// Raw codes are indexed through 32-bit dense slots.
constexpr std::uint64_t kMaxRawActions = std::uint64_t{1} << 31;

}  // namespace

ActionSet::ActionSet(const ActionConfig& config, std::size_t ap_count, std::size_t vu_count,
                     const phy::PhyConfig& phy)
    : config_(config), aps_(ap_count), vus_(vu_count) {
  FieldErrors errors;
  config.validate(errors);
  errors.require(ap_count >= 1, "aps.x_m", "need at least one AP");
  errors.require(vu_count >= 1, "drop.vu_count", "need at least one VU");
  errors.throw_if_any();

  slots_ = config.mode == ActionMode::PerPair ? aps_ * vus_ : aps_;
  radix_ = config.levels_dbm.size() + (config.association_search ? 1 : 0);
  raw_count_ = checked_pow(radix_, slots_);
  sub_count_ = checked_pow(radix_, slots_ / aps_);
  if (raw_count_ > kMaxRawActions) throw ConfigError("actions", "action space too large to enumerate");

  if (config.association_search) digit_mw_.push_back(0.0);
  for (double dbm : config.levels_dbm) digit_mw_.push_back(dbm_to_mw(dbm));

  const auto full = channel::Coverage::all(vus_, aps_);
  raw_to_dense_.assign(raw_count_, kMasked);
  for (std::uint64_t raw = 0; raw < raw_count_; ++raw) {
    if (!phy::check_feasible(plan_from_raw(raw), phy, full)) continue;
    raw_to_dense_[raw] = static_cast<std::int32_t>(dense_to_raw_.size());
    dense_to_raw_.push_back(raw);
  }
}

std::optional<std::size_t> ActionSet::dense_index(std::uint64_t raw) const {
  if (raw >= raw_count_ || raw_to_dense_[raw] == kMasked) return std::nullopt;
  return static_cast<std::size_t>(raw_to_dense_[raw]);
}

std::vector<std::size_t> ActionSet::decode(std::uint64_t raw) const {
  if (raw >= raw_count_) throw std::domain_error("ActionSet::decode: code out of range");
  std::vector<std::size_t> digits(slots_);
  for (std::size_t s = 0; s < slots_; ++s) {
    digits[s] = static_cast<std::size_t>(raw % radix_);
    raw /= radix_;
  }
  return digits;
}

std::uint64_t ActionSet::encode(const std::vector<std::size_t>& digits) const {
  if (digits.size() != slots_) throw std::domain_error("ActionSet::encode: wrong digit count");
  std::uint64_t raw = 0;
  for (std::size_t s = slots_; s-- > 0;) {
    if (digits[s] >= radix_) throw std::domain_error("ActionSet::encode: digit out of range");
    raw = raw * radix_ + digits[s];
  }
  return raw;
}

void ActionSet::fill_powers(std::uint64_t raw, std::span<double> mw) const {
  if (raw >= raw_count_) throw std::domain_error("ActionSet::plan: code out of range");
  if (config_.mode == ActionMode::PerPair) {
    for (std::size_t s = 0; s < slots_; ++s) {
      mw[s] = digit_mw_[raw % radix_];
      raw /= radix_;
    }
  } else {
    for (std::size_t j = 0; j < aps_; ++j) {
      const double p = digit_mw_[raw % radix_];
      raw /= radix_;
      for (std::size_t i = 0; i < vus_; ++i) mw[j * vus_ + i] = p;
    }
  }
}

phy::PowerPlan ActionSet::plan_from_raw(std::uint64_t raw) const {
  phy::PowerPlan plan(aps_, vus_);
  fill_powers(raw, plan.mw);
  return plan;
}

std::uint64_t ActionSet::sub_action_of(std::uint64_t raw, std::size_t ap) const {
  for (std::size_t j = 0; j < ap; ++j) raw /= sub_count_;
  return raw % sub_count_;
}

std::uint64_t ActionSet::compose(const std::vector<std::uint64_t>& sub_actions) const {
  if (sub_actions.size() != aps_) throw std::domain_error("ActionSet::compose: one sub-action per AP");
  std::uint64_t raw = 0;
  for (std::size_t j = aps_; j-- > 0;) {
    if (sub_actions[j] >= sub_count_) throw std::domain_error("ActionSet::compose: sub-action out of range");
    raw = raw * sub_count_ + sub_actions[j];
  }
  return raw;
}

std::optional<std::uint64_t> ActionSet::uniform_code(
    const std::vector<std::size_t>& per_ap_digit) const {
  if (per_ap_digit.size() != aps_) return std::nullopt;
  std::vector<std::size_t> digits;
  digits.reserve(slots_);
  for (std::size_t j = 0; j < aps_; ++j) {
    if (per_ap_digit[j] >= radix_) return std::nullopt;
    for (std::size_t k = 0; k < slots_per_ap(); ++k) digits.push_back(per_ap_digit[j]);
  }
  return encode(digits);
}

std::string ActionSet::descriptor() const {
  std::ostringstream os;
  os << "mode=" << (config_.mode == ActionMode::PerPair ? "per_pair" : "per_ap_uniform")
     << " association_search=" << (config_.association_search ? "true" : "false") << " levels_dbm=";
  for (std::size_t k = 0; k < config_.levels_dbm.size(); ++k)
    os << (k ? ";" : "") << config_.levels_dbm[k];
  os << " aps=" << aps_ << " vus=" << vus_ << " raw=" << raw_count_ << " feasible=" << size();
  return os.str();
}

ActionSet build_action_space(const ScenarioConfig& config) {
  ActionSet set(config.actions, config.ap_count(), config.vu_count(), config.phy);
  if (set.size() == 0)
    throw ConfigError("actions", "no feasible action under the power budget");
  return set;
}

StateIndex state_index(const mobility::VehicleState& vehicles, const mobility::RoadConfig& road) {
  if (vehicles.size() == 0) throw ConfigError("drop.vu_count", "no vehicles");
  const double x = vehicles.x.front();
  for (double xi : vehicles.x)
    if (xi != x) throw ConfigError("drop.mode", "tabular state needs a common-x convoy");
  StateIndex s;
  s.terminal = x >= road.roi_length_m;
  // The tolerance absorbs drift from repeated displacement additions.
  s.bin = static_cast<std::size_t>(std::floor(x / road.displacement_m() + 1e-9));
  return s;
}

}  // namespace vcell::actionspace
