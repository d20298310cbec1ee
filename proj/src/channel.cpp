#include "vcell/channel.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

#include "vcell/rng.hpp"

namespace vcell::channel {

void ChannelConfig::validate(FieldErrors& errors) const {
  errors.require(reference_distance_m > 0.0, "channel.reference_distance_m", "must be > 0");
  errors.require(shadowing_std_db >= 0.0, "channel.shadowing_std_db", "must be >= 0");
  errors.require(noise_variance_mw > 0.0, "channel.noise_variance_mw", "must be > 0");
}

Link compose_link(double large_scale, double shadowing, ComplexVector fast_fading) {
  Link link;
  link.large_scale = large_scale;
  link.shadowing = shadowing;
  const double amplitude = std::sqrt(large_scale) * std::sqrt(shadowing);
  link.h.resize(fast_fading.size());
  for (std::size_t p = 0; p < fast_fading.size(); ++p) link.h[p] = amplitude * fast_fading[p];
  link.fast_fading = std::move(fast_fading);
  return link;
}

ChannelRealization::ChannelRealization(std::size_t vu_count, std::size_t ap_count,
                                       std::vector<Link> links)
    : vu_count_(vu_count), ap_count_(ap_count), links_(std::move(links)) {
  if (links_.size() != vu_count * ap_count)
    throw std::invalid_argument("ChannelRealization: link count does not match vu x ap");
}

ComplexVector ChannelRealization::stacked(std::size_t vu) const {
  ComplexVector out;
  for (std::size_t j = 0; j < ap_count_; ++j) {
    const auto& h = link(vu, j).h;
    out.insert(out.end(), h.begin(), h.end());
  }
  return out;
}

double pathloss_db(double distance_m, const ChannelConfig& config) {
  if (!(distance_m > 0.0)) throw std::domain_error("pathloss: distance must be > 0");
  const double d = std::max(distance_m, config.reference_distance_m);
  return config.pathloss_intercept_db + config.pathloss_slope_db * std::log10(d / 1000.0);
}

double pathloss_gain(double distance_m, const ChannelConfig& config) {
  return std::pow(10.0, -pathloss_db(distance_m, config) / 10.0);
}

ChannelRealization draw_channel(const mobility::VehicleState& vehicles,
                                const mobility::RoadConfig& road, const mobility::ApLayout& aps,
                                std::uint64_t state_id, std::uint64_t seed,
                                const ChannelConfig& config, std::uint64_t draw_index) {
  const std::size_t vus = vehicles.size();
  const std::size_t ap_count = aps.size();
  const auto antennas = static_cast<std::size_t>(aps.antennas_per_ap);
  const std::uint64_t draw = config.fading == FadingMode::Frozen ? 0 : draw_index;

  std::vector<Link> links;
  links.reserve(vus * ap_count);
  for (std::size_t i = 0; i < vus; ++i) {
    for (std::size_t j = 0; j < ap_count; ++j) {
      const std::uint64_t pair = i * ap_count + j;
      Rng rng = make_rng(seed, Stream::Channel, state_id, pair, draw);
      std::normal_distribution<double> shadow_db(0.0, 1.0);
      // CN(0, 1): real and imaginary parts each carry half the variance.
      std::normal_distribution<double> component(0.0, std::sqrt(0.5));

      const double x_db = config.shadowing_std_db * shadow_db(rng);
      ComplexVector tau(antennas);
      for (auto& t : tau) {
        const double re = component(rng);
        const double im = component(rng);
        t = {re, im};
      }
      const double d = mobility::distance(vehicles.position(i, road), aps.positions[j]);
      links.push_back(compose_link(pathloss_gain(d, config), std::pow(10.0, x_db / 10.0),
                                   std::move(tau)));
    }
  }
  return ChannelRealization(vus, ap_count, std::move(links));
}

bool in_coverage(mobility::Point vu, mobility::Point ap, double radius_m) {
  return mobility::distance(vu, ap) <= radius_m;
}

Coverage Coverage::all(std::size_t vu_count, std::size_t ap_count) {
  return {vu_count, ap_count, std::vector<char>(vu_count * ap_count, 1)};
}

Coverage coverage_of(const mobility::VehicleState& vehicles, const mobility::RoadConfig& road,
                     const mobility::ApLayout& aps) {
  Coverage c{vehicles.size(), aps.size(), std::vector<char>(vehicles.size() * aps.size(), 0)};
  for (std::size_t i = 0; i < vehicles.size(); ++i)
    for (std::size_t j = 0; j < aps.size(); ++j)
      c.covered[i * aps.size() + j] =
          in_coverage(vehicles.position(i, road), aps.positions[j], aps.coverage_radius_m) ? 1 : 0;
  return c;
}

}  // namespace vcell::channel
