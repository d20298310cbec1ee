#pragma once

#include <cstddef>
#include <vector>

#include "vcell/channel.hpp"
#include "vcell/errors.hpp"
#include "vcell/mobility.hpp"
#include "vcell/phy.hpp"

namespace vcell {

enum class ActionMode {
  PerPair,       // one power level per (AP, VU) pair
  PerApUniform,  // one power level per AP, shared by all of its VUs
};

struct ActionConfig {
  std::vector<double> levels_dbm{5.0, 10.0, 15.0, 20.0};
  ActionMode mode = ActionMode::PerApUniform;
  // Adds an OFF level to every slot so the association itself is searched.
  bool association_search = false;

  void validate(FieldErrors& errors) const;
};

// Everything that defines the simulated network.
struct ScenarioConfig {
  mobility::RoadConfig road;
  mobility::DropConfig drop;
  mobility::ApConfig aps;
  channel::ChannelConfig channel;
  phy::PhyConfig phy;
  ActionConfig actions;

  std::size_t vu_count() const noexcept { return drop.vu_count; }
  std::size_t ap_count() const noexcept { return aps.x_m.size(); }

  void validate(FieldErrors& errors) const;
  void validate() const;
};

}  // namespace vcell
