#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <utility>
#include <vector>

#include "vcell/errors.hpp"

namespace vcell::mobility {

struct Point {
  double x = 0.0;
  double y = 0.0;
};

double distance(Point a, Point b);

struct RoadConfig {
  double roi_length_m = 500.0;
  int lane_count = 3;
  double lane_width_m = 4.0;
  double vu_speed_kmh = 140.0;
  double timestep_s = 0.1;

  // Longitudinal distance covered by every VU in one step.
  double displacement_m() const;
  // Lane m is centered at (m + 0.5) * lane_width.
  double lane_center_y(int lane) const;

  void validate(FieldErrors& errors) const;
};

enum class DropMode {
  CommonX,         // one VU per lane, all at the same x
  SafetyDistance,  // uniform per-lane drop with a minimum headway gap
};

enum class StartMode {
  Origin,      // convoy starts at x = 0
  UniformBin,  // convoy starts at a uniformly drawn displacement multiple
};

struct DropConfig {
  std::size_t vu_count = 3;
  DropMode mode = DropMode::CommonX;
  StartMode start = StartMode::Origin;
  double headway_s = 2.5;

  // Minimum in-lane gap used by the safety-distance drop.
  double min_gap_m(const RoadConfig& road) const;

  void validate(const RoadConfig& road, FieldErrors& errors) const;
};

struct ApConfig {
  std::vector<double> x_m{100.0, 250.0, 400.0};
  double y_m = 0.0;
  double coverage_radius_m = 250.0;
  int antennas_per_ap = 8;

  void validate(FieldErrors& errors) const;
};

struct VehicleState {
  std::vector<double> x;
  std::vector<int> lane;

  std::size_t size() const noexcept { return x.size(); }
  Point position(std::size_t vu, const RoadConfig& road) const {
    return {x[vu], road.lane_center_y(lane[vu])};
  }
};

struct ApLayout {
  std::vector<Point> positions;
  double coverage_radius_m = 0.0;
  int antennas_per_ap = 1;

  std::size_t size() const noexcept { return positions.size(); }
};

// Number of distinct convoy positions before the ROI exit.
std::size_t bin_count(const RoadConfig& road);

VehicleState drop_vehicles(const RoadConfig& road, const DropConfig& drop, std::uint64_t seed);
ApLayout place_aps(const ApConfig& aps);

std::pair<VehicleState, ApLayout> spawn_scenario(const RoadConfig& road, const DropConfig& drop,
                                                 const ApConfig& aps, std::uint64_t seed);

// Moves every VU forward by one displacement. Returns nullopt once any VU
// leaves the region of interest.
std::optional<VehicleState> advance(const VehicleState& vehicles, const RoadConfig& road);

// Places a common-x convoy (VU i in lane i) at the given x.
VehicleState convoy_at(double x, std::size_t vu_count);

}  // namespace vcell::mobility
