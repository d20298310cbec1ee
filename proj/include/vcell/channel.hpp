#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "vcell/errors.hpp"
#include "vcell/mobility.hpp"

namespace vcell::channel {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

enum class FadingMode {
  Frozen,      // channel is a pure function of (state, pair, seed)
  Stochastic,  // fresh fast fading and shadowing on every visit
};

struct ChannelConfig {
  // PL_dB(d) = intercept + slope * log10(d / 1 km), d clamped at reference.
  double pathloss_intercept_db = 128.1;
  double pathloss_slope_db = 37.6;
  double reference_distance_m = 35.0;
  double shadowing_std_db = 8.0;
  // Receiver noise power in mW (same unit as the transmit powers).
  double noise_variance_mw = 3.1623e-10;
  FadingMode fading = FadingMode::Frozen;

  void validate(FieldErrors& errors) const;
};

// One (VU, AP) link: h = sqrt(large_scale) * sqrt(shadowing) * fast_fading.
struct Link {
  ComplexVector h;
  double large_scale = 1.0;
  double shadowing = 1.0;
  ComplexVector fast_fading;
};

Link compose_link(double large_scale, double shadowing, ComplexVector fast_fading);

class ChannelRealization {
 public:
  ChannelRealization() = default;
  ChannelRealization(std::size_t vu_count, std::size_t ap_count, std::vector<Link> links);

  std::size_t vu_count() const noexcept { return vu_count_; }
  std::size_t ap_count() const noexcept { return ap_count_; }

  const Link& link(std::size_t vu, std::size_t ap) const { return links_[vu * ap_count_ + ap]; }
  Link& link(std::size_t vu, std::size_t ap) { return links_[vu * ap_count_ + ap]; }

  // Concatenation of the per-AP vectors seen by one VU (length N = sum N_j).
  ComplexVector stacked(std::size_t vu) const;

 private:
  std::size_t vu_count_ = 0;
  std::size_t ap_count_ = 0;
  std::vector<Link> links_;
};

double pathloss_db(double distance_m, const ChannelConfig& config);
double pathloss_gain(double distance_m, const ChannelConfig& config);

// Draws all links for the given geometry. `draw_index` selects a fresh
// realization in stochastic mode and is ignored in frozen mode.
ChannelRealization draw_channel(const mobility::VehicleState& vehicles,
                                const mobility::RoadConfig& road, const mobility::ApLayout& aps,
                                std::uint64_t state_id, std::uint64_t seed,
                                const ChannelConfig& config, std::uint64_t draw_index = 0);

bool in_coverage(mobility::Point vu, mobility::Point ap, double radius_m);

// Row-major (vu, ap) coverage flags.
struct Coverage {
  std::size_t vu_count = 0;
  std::size_t ap_count = 0;
  std::vector<char> covered;

  bool operator()(std::size_t vu, std::size_t ap) const {
    return covered[vu * ap_count + ap] != 0;
  }
  static Coverage all(std::size_t vu_count, std::size_t ap_count);
};

Coverage coverage_of(const mobility::VehicleState& vehicles, const mobility::RoadConfig& road,
                     const mobility::ApLayout& aps);

}  // namespace vcell::channel
