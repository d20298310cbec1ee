#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "vcell/channel.hpp"
#include "vcell/mobility.hpp"
#include "vcell/phy.hpp"
#include "vcell/scenario.hpp"

namespace vcell::actionspace {

// Binary VU-AP association. a(vu, ap) and u(ap, vu) are the two indicator
// views of the same matrix.
class Association {
 public:
  Association(std::size_t vu_count, std::size_t ap_count)
      : vus_(vu_count), aps_(ap_count), a_(vu_count * ap_count, 0) {}

  std::size_t vu_count() const noexcept { return vus_; }
  std::size_t ap_count() const noexcept { return aps_; }

  bool a(std::size_t vu, std::size_t ap) const { return a_[vu * aps_ + ap] != 0; }
  bool u(std::size_t ap, std::size_t vu) const { return a(vu, ap); }
  void set(std::size_t vu, std::size_t ap, bool on) { a_[vu * aps_ + ap] = on ? 1 : 0; }

  // APs serving a VU (its virtual cell).
  std::vector<std::size_t> serving_aps(std::size_t vu) const;
  // VUs served by an AP.
  std::vector<std::size_t> served_vus(std::size_t ap) const;

 private:
  std::size_t vus_;
  std::size_t aps_;
  std::vector<char> a_;
};

Association association_of(const phy::PowerPlan& plan, const channel::Coverage& coverage);

// Enumerated joint power actions. Raw codes are mixed-radix numbers with one
// digit per slot (least significant first); slot order is AP-major. Dense
// indices enumerate the raw codes that survive feasibility masking.
class ActionSet {
 public:
  static constexpr std::int32_t kMasked = -1;

  ActionSet(const ActionConfig& config, std::size_t ap_count, std::size_t vu_count,
            const phy::PhyConfig& phy);

  std::size_t size() const noexcept { return dense_to_raw_.size(); }
  std::uint64_t raw_count() const noexcept { return raw_count_; }

  ActionMode mode() const noexcept { return config_.mode; }
  bool association_search() const noexcept { return config_.association_search; }
  const std::vector<double>& levels_dbm() const noexcept { return config_.levels_dbm; }

  std::size_t ap_count() const noexcept { return aps_; }
  std::size_t vu_count() const noexcept { return vus_; }
  std::size_t slot_count() const noexcept { return slots_; }
  std::size_t radix() const noexcept { return radix_; }
  std::size_t slots_per_ap() const noexcept { return slots_ / aps_; }
  // Number of per-AP sub-actions (digits owned by one AP).
  std::uint64_t sub_action_count() const noexcept { return sub_count_; }

  std::uint64_t raw_code(std::size_t dense) const { return dense_to_raw_.at(dense); }
  std::optional<std::size_t> dense_index(std::uint64_t raw) const;

  std::vector<std::size_t> decode(std::uint64_t raw) const;
  std::uint64_t encode(const std::vector<std::size_t>& digits) const;

  // Power in mW carried by one digit; digit 0 is OFF under association search.
  double digit_mw(std::size_t digit) const { return digit_mw_[digit]; }

  phy::PowerPlan plan_from_raw(std::uint64_t raw) const;
  phy::PowerPlan plan(std::size_t dense) const { return plan_from_raw(raw_code(dense)); }
  // Writes the AP-major powers of a raw code into `mw` (size ap * vu).
  void fill_powers(std::uint64_t raw, std::span<double> mw) const;

  // Per-AP factorization used by the multi-agent learner.
  std::uint64_t sub_action_of(std::uint64_t raw, std::size_t ap) const;
  std::uint64_t compose(const std::vector<std::uint64_t>& sub_actions) const;

  // Finds the raw code whose plan equals the given per-AP uniform level
  // digits; returns nullopt if the grid cannot express it.
  std::optional<std::uint64_t> uniform_code(const std::vector<std::size_t>& per_ap_digit) const;

  // One-line descriptor written into every metrics file.
  std::string descriptor() const;

 private:
  ActionConfig config_;
  std::size_t aps_;
  std::size_t vus_;
  std::size_t slots_;
  std::size_t radix_;
  std::uint64_t raw_count_;
  std::uint64_t sub_count_;
  std::vector<double> digit_mw_;
  std::vector<std::uint64_t> dense_to_raw_;
  std::vector<std::int32_t> raw_to_dense_;
};

// Builds the action set for a scenario. Masks every raw action that fails
// the feasibility check with all pairs covered; throws ConfigError when
// nothing survives.
ActionSet build_action_space(const ScenarioConfig& config);

struct StateIndex {
  std::size_t bin = 0;
  bool terminal = false;

  friend bool operator==(const StateIndex&, const StateIndex&) = default;
};

// Convoy position bin. Requires every VU at the same x.
StateIndex state_index(const mobility::VehicleState& vehicles, const mobility::RoadConfig& road);

}  // namespace vcell::actionspace
