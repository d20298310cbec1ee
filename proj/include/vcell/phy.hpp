#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "vcell/channel.hpp"
#include "vcell/errors.hpp"

namespace vcell::phy {

using channel::ChannelRealization;
using channel::Complex;
using channel::ComplexVector;
using channel::Coverage;

// Radio and constraint parameters. Per-VU / per-AP vectors of length one are
// broadcast to every VU / AP.
struct PhyConfig {
  double kappa = 0.1;
  std::vector<double> gamma_min_db{10.0};
  std::vector<double> p_max_dbm{25.0};
  std::vector<double> zeta{1.0};

  double gamma_min_linear(std::size_t vu) const;
  double p_max_mw(std::size_t ap) const;
  double weight(std::size_t vu) const;

  void validate(std::size_t vu_count, std::size_t ap_count, FieldErrors& errors) const;
};

// Transmit power per (AP, VU) pair in mW; zero means the pair is OFF.
struct PowerPlan {
  std::size_t ap_count = 0;
  std::size_t vu_count = 0;
  std::vector<double> mw;  // AP-major: index ap * vu_count + vu

  PowerPlan() = default;
  PowerPlan(std::size_t aps, std::size_t vus) : ap_count(aps), vu_count(vus), mw(aps * vus, 0.0) {}

  double& at(std::size_t ap, std::size_t vu) { return mw[ap * vu_count + vu]; }
  double at(std::size_t ap, std::size_t vu) const { return mw[ap * vu_count + vu]; }
};

// Zeroes every pair outside coverage.
PowerPlan apply_coverage(PowerPlan plan, const Coverage& coverage);

// Per (AP, VU) beam vectors plus the stacked per-VU view.
struct BeamAssignment {
  std::size_t ap_count = 0;
  std::size_t vu_count = 0;
  std::vector<ComplexVector> w;  // AP-major like PowerPlan

  const ComplexVector& at(std::size_t ap, std::size_t vu) const { return w[ap * vu_count + vu]; }
  ComplexVector stacked(std::size_t vu) const;
};

// Channel-matched beam scaled to the requested power: w = h / |h| * sqrt(p).
ComplexVector beam_vector(const ComplexVector& h, double power_mw);

// Beams for every pair; uncovered pairs are forced to the zero vector.
BeamAssignment build_beams(const ChannelRealization& channels, const PowerPlan& plan,
                           const Coverage& coverage);

double squared_norm(const ComplexVector& v);

double sinr(std::size_t vu, const ChannelRealization& channels, const BeamAssignment& beams,
            double noise_variance);

double rate(double sinr_linear, double kappa);

std::size_t serving_count(const BeamAssignment& beams, std::size_t vu);
double backhaul_consumption(std::size_t serving_aps, double rate_bps_hz);
double backhaul_consumption(const BeamAssignment& beams, std::size_t vu, double rate_bps_hz);

// Virtual-cell lower bound (every VU has a covered serving AP) and per-AP
// power budget. The SINR floor is applied by reward().
bool check_feasible(const PowerPlan& plan, const PhyConfig& config, const Coverage& coverage);

struct LinkMetrics {
  std::vector<double> sinr;
  std::vector<double> rate;
  std::vector<std::size_t> serving;
  std::vector<double> backhaul;

  std::size_t size() const noexcept { return sinr.size(); }
};

LinkMetrics compute_metrics(const ChannelRealization& channels, const BeamAssignment& beams,
                            double noise_variance, double kappa);

bool meets_sinr_floor(const LinkMetrics& metrics, const PhyConfig& config);

// Weighted backhaul sum when every VU clears its SINR floor, else zero.
double reward(const LinkMetrics& metrics, const PhyConfig& config);

// Precomputed inner products h_i^H (h_{i'j} / |h_{i'j}|) for one channel
// realization, so that SINR for any power plan costs O(U^2 A).
class LinkGains {
 public:
  explicit LinkGains(const ChannelRealization& channels);

  std::size_t vu_count() const noexcept { return vus_; }
  std::size_t ap_count() const noexcept { return aps_; }

  // `amplitude` holds sqrt(power_mw) per pair (AP-major), already zero for
  // uncovered pairs. Writes one SINR per VU into `out`.
  void sinr(std::span<const double> amplitude, double noise_variance, std::span<double> out) const;

  // Full metrics for a plan, with coverage forcing applied.
  LinkMetrics metrics(const PowerPlan& plan, const Coverage& coverage, double noise_variance,
                      double kappa) const;

 private:
  Complex gain(std::size_t vu, std::size_t beam_vu, std::size_t ap) const {
    return gains_[(vu * vus_ + beam_vu) * aps_ + ap];
  }

  std::size_t vus_ = 0;
  std::size_t aps_ = 0;
  std::vector<Complex> gains_;
  std::vector<char> degenerate_;  // AP-major, true when |h| == 0
};

// Allocation-free reward and feasibility for many plans at one channel and
// coverage. Produces the same values as metrics() + check_feasible() +
// reward().
class RewardKernel {
 public:
  RewardKernel(const LinkGains& gains, const Coverage& coverage, const PhyConfig& config,
               double noise_variance);

  struct Result {
    double reward = 0.0;
    bool feasible = false;
    bool success = false;
  };

  // `mw` is AP-major like PowerPlan::mw.
  Result operator()(std::span<const double> mw);
  bool feasible(std::span<const double> mw) const;

 private:
  const LinkGains& gains_;
  const Coverage& coverage_;
  const PhyConfig& config_;
  double noise_;
  std::size_t vus_;
  std::size_t aps_;
  std::vector<double> gamma_min_;
  std::vector<double> budget_;
  std::vector<double> amplitude_;
  std::vector<double> sinr_;
  std::vector<std::size_t> serving_;
};

}  // namespace vcell::phy
