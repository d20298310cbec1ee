#include "vcell/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <string>

#include "vcell/rng.hpp"
#include "vcell/units.hpp"

namespace vcell::mobility {

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

double RoadConfig::displacement_m() const { return kmh_to_mps(vu_speed_kmh) * timestep_s; }

double RoadConfig::lane_center_y(int lane) const { return (lane + 0.5) * lane_width_m; }

void RoadConfig::validate(FieldErrors& errors) const {
  errors.require(roi_length_m > 0.0, "road.roi_length_m", "must be > 0");
  errors.require(lane_count >= 1, "road.lane_count", "must be >= 1");
  errors.require(lane_width_m > 0.0, "road.lane_width_m", "must be > 0");
  errors.require(vu_speed_kmh > 0.0, "road.vu_speed_kmh", "must be > 0");
  errors.require(timestep_s > 0.0, "road.timestep_s", "must be > 0");
}

double DropConfig::min_gap_m(const RoadConfig& road) const {
  return headway_s * kmh_to_mps(road.vu_speed_kmh);
}

void DropConfig::validate(const RoadConfig& road, FieldErrors& errors) const {
  errors.require(vu_count >= 1, "drop.vu_count", "must be >= 1");
  errors.require(headway_s >= 0.0, "drop.headway_s", "must be >= 0");
  if (mode == DropMode::CommonX) {
    errors.require(road.lane_count < 0 || vu_count <= static_cast<std::size_t>(road.lane_count),
                   "drop.vu_count", "common-x drop needs one lane per VU");
  } else if (road.lane_count >= 1) {
    const auto lanes = static_cast<std::size_t>(road.lane_count);
    const std::size_t per_lane = (vu_count + lanes - 1) / lanes;
    const double needed = per_lane > 0 ? static_cast<double>(per_lane - 1) * min_gap_m(road) : 0.0;
    errors.require(needed < road.roi_length_m, "drop.headway_s",
                   "safety gaps do not fit inside the region of interest");
  }
}

void ApConfig::validate(FieldErrors& errors) const {
  errors.require(!x_m.empty(), "aps.x_m", "need at least one AP");
  errors.require(coverage_radius_m > 0.0, "aps.coverage_radius_m", "must be > 0");
  errors.require(antennas_per_ap >= 1, "aps.antennas_per_ap", "must be >= 1");
}

std::size_t bin_count(const RoadConfig& road) {
  // The tolerance keeps exact multiples (roi = k * displacement) at k bins.
  return static_cast<std::size_t>(std::ceil(road.roi_length_m / road.displacement_m() - 1e-9));
}

VehicleState convoy_at(double x, std::size_t vu_count) {
  VehicleState v;
  v.x.assign(vu_count, x);
  v.lane.resize(vu_count);
  for (std::size_t i = 0; i < vu_count; ++i) v.lane[i] = static_cast<int>(i);
  return v;
}

VehicleState drop_vehicles(const RoadConfig& road, const DropConfig& drop, std::uint64_t seed) {
  FieldErrors errors;
  road.validate(errors);
  drop.validate(road, errors);
  errors.throw_if_any();

  Rng rng = make_rng(seed, Stream::Drop);

  if (drop.mode == DropMode::CommonX) {
    double x = 0.0;
    if (drop.start == StartMode::UniformBin) {
      std::uniform_int_distribution<std::size_t> pick(0, bin_count(road) - 1);
      x = static_cast<double>(pick(rng)) * road.displacement_m();
    }
    return convoy_at(x, drop.vu_count);
  }

  VehicleState v;
  v.x.resize(drop.vu_count);
  v.lane.resize(drop.vu_count);
  const auto lanes = static_cast<std::size_t>(road.lane_count);
  const double gap = drop.min_gap_m(road);
  for (std::size_t lane = 0; lane < lanes; ++lane) {
    std::vector<std::size_t> members;
    for (std::size_t i = lane; i < drop.vu_count; i += lanes) members.push_back(i);
    if (members.empty()) continue;
    // Uniform over gap-respecting configurations: draw in the shrunken
    // interval, sort, then re-insert the gaps.
    const double span = road.roi_length_m - static_cast<double>(members.size() - 1) * gap;
    std::uniform_real_distribution<double> u(0.0, span);
    std::vector<double> xs(members.size());
    for (auto& x : xs) x = u(rng);
    std::sort(xs.begin(), xs.end());
    for (std::size_t k = 0; k < members.size(); ++k) {
      v.x[members[k]] = xs[k] + static_cast<double>(k) * gap;
      v.lane[members[k]] = static_cast<int>(lane);
    }
  }
  return v;
}

ApLayout place_aps(const ApConfig& aps) {
  FieldErrors errors;
  aps.validate(errors);
  errors.throw_if_any();

  ApLayout layout;
  layout.coverage_radius_m = aps.coverage_radius_m;
  layout.antennas_per_ap = aps.antennas_per_ap;
  for (double x : aps.x_m) layout.positions.push_back({x, aps.y_m});
  return layout;
}

std::pair<VehicleState, ApLayout> spawn_scenario(const RoadConfig& road, const DropConfig& drop,
                                                 const ApConfig& aps, std::uint64_t seed) {
  return {drop_vehicles(road, drop, seed), place_aps(aps)};
}

std::optional<VehicleState> advance(const VehicleState& vehicles, const RoadConfig& road) {
  const double step = road.displacement_m();
  VehicleState next = vehicles;
  bool outside = false;
  for (double& x : next.x) {
    x += step;
    if (x >= road.roi_length_m) outside = true;
  }
  if (outside) return std::nullopt;
  return next;
}

}  // namespace vcell::mobility
