#include "vcell/scenario.hpp"

namespace vcell {

void ActionConfig::validate(FieldErrors& errors) const {
  errors.require(!levels_dbm.empty(), "actions.levels_dbm", "power grid must be nonempty");
}

void ScenarioConfig::validate(FieldErrors& errors) const {
  road.validate(errors);
  drop.validate(road, errors);
  aps.validate(errors);
  channel.validate(errors);
  phy.validate(vu_count(), ap_count(), errors);
  actions.validate(errors);
}

void ScenarioConfig::validate() const {
  FieldErrors errors;
  validate(errors);
  errors.throw_if_any();
}

}  // namespace vcell
