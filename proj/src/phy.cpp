#include "vcell/phy.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "vcell/units.hpp"

namespace vcell::phy {

namespace {

double broadcast(const std::vector<double>& values, std::size_t index) {
  return values.size() == 1 ? values.front() : values.at(index);
}

// Conjugate-linear in the first argument: a^H b.
Complex inner(const ComplexVector& a, const ComplexVector& b) {
  Complex acc{0.0, 0.0};
  for (std::size_t p = 0; p < a.size(); ++p) acc += std::conj(a[p]) * b[p];
  return acc;
}

// Relative slack for budget comparisons so that P_max / U summed U times is
// not rejected by rounding.
constexpr double kBudgetSlack = 1e-12;

}  // namespace

double PhyConfig::gamma_min_linear(std::size_t vu) const {
  return db_to_linear(broadcast(gamma_min_db, vu));
}

double PhyConfig::p_max_mw(std::size_t ap) const { return dbm_to_mw(broadcast(p_max_dbm, ap)); }

double PhyConfig::weight(std::size_t vu) const { return broadcast(zeta, vu); }

void PhyConfig::validate(std::size_t vu_count, std::size_t ap_count, FieldErrors& errors) const {
  errors.require(kappa >= 0.0 && kappa < 1.0, "phy.kappa", "must be in [0, 1)");
  errors.require(gamma_min_db.size() == 1 || gamma_min_db.size() == vu_count, "phy.gamma_min_db",
                 "needs one value or one per VU");
  errors.require(p_max_dbm.size() == 1 || p_max_dbm.size() == ap_count, "phy.p_max_dbm",
                 "needs one value or one per AP");
  errors.require(zeta.size() == 1 || zeta.size() == vu_count, "phy.zeta",
                 "needs one value or one per VU");
  bool nonneg = true;
  for (double z : zeta) nonneg = nonneg && z >= 0.0;
  errors.require(nonneg, "phy.zeta", "weights must be >= 0");
}

PowerPlan apply_coverage(PowerPlan plan, const Coverage& coverage) {
  for (std::size_t j = 0; j < plan.ap_count; ++j)
    for (std::size_t i = 0; i < plan.vu_count; ++i)
      if (!coverage(i, j)) plan.at(j, i) = 0.0;
  return plan;
}

ComplexVector BeamAssignment::stacked(std::size_t vu) const {
  ComplexVector out;
  for (std::size_t j = 0; j < ap_count; ++j) {
    const auto& v = at(j, vu);
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

double squared_norm(const ComplexVector& v) {
  double s = 0.0;
  for (const auto& c : v) s += std::norm(c);
  return s;
}

ComplexVector beam_vector(const ComplexVector& h, double power_mw) {
  ComplexVector w(h.size(), Complex{0.0, 0.0});
  if (power_mw <= 0.0) return w;
  const double norm = std::sqrt(squared_norm(h));
  if (norm == 0.0) throw DegenerateChannelError("beam_vector: zero channel with positive power");
  const double scale = std::sqrt(power_mw) / norm;
  for (std::size_t p = 0; p < h.size(); ++p) w[p] = h[p] * scale;
  return w;
}

BeamAssignment build_beams(const ChannelRealization& channels, const PowerPlan& plan,
                           const Coverage& coverage) {
  BeamAssignment beams{plan.ap_count, plan.vu_count, {}};
  beams.w.reserve(plan.ap_count * plan.vu_count);
  for (std::size_t j = 0; j < plan.ap_count; ++j) {
    for (std::size_t i = 0; i < plan.vu_count; ++i) {
      const double p = coverage(i, j) ? plan.at(j, i) : 0.0;
      beams.w.push_back(beam_vector(channels.link(i, j).h, p));
    }
  }
  return beams;
}

double sinr(std::size_t vu, const ChannelRealization& channels, const BeamAssignment& beams,
            double noise_variance) {
  const ComplexVector h = channels.stacked(vu);
  const double desired = std::norm(inner(h, beams.stacked(vu)));
  double interference = 0.0;
  for (std::size_t other = 0; other < beams.vu_count; ++other) {
    if (other == vu) continue;
    interference += std::norm(inner(h, beams.stacked(other)));
  }
  return desired / (noise_variance + interference);
}

double rate(double sinr_linear, double kappa) { return (1.0 - kappa) * std::log2(1.0 + sinr_linear); }

std::size_t serving_count(const BeamAssignment& beams, std::size_t vu) {
  std::size_t n = 0;
  for (std::size_t j = 0; j < beams.ap_count; ++j)
    if (squared_norm(beams.at(j, vu)) > 0.0) ++n;
  return n;
}

double backhaul_consumption(std::size_t serving_aps, double rate_bps_hz) {
  return static_cast<double>(serving_aps) * rate_bps_hz;
}

double backhaul_consumption(const BeamAssignment& beams, std::size_t vu, double rate_bps_hz) {
  return backhaul_consumption(serving_count(beams, vu), rate_bps_hz);
}

bool check_feasible(const PowerPlan& plan, const PhyConfig& config, const Coverage& coverage) {
  for (std::size_t i = 0; i < plan.vu_count; ++i) {
    bool served = false;
    for (std::size_t j = 0; j < plan.ap_count && !served; ++j)
      served = coverage(i, j) && plan.at(j, i) > 0.0;
    if (!served) return false;
  }
  for (std::size_t j = 0; j < plan.ap_count; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < plan.vu_count; ++i)
      if (coverage(i, j)) total += plan.at(j, i);
    const double budget = config.p_max_mw(j);
    if (total > budget * (1.0 + kBudgetSlack)) return false;
  }
  return true;
}

LinkMetrics compute_metrics(const ChannelRealization& channels, const BeamAssignment& beams,
                            double noise_variance, double kappa) {
  LinkMetrics m;
  const std::size_t vus = beams.vu_count;
  m.sinr.resize(vus);
  m.rate.resize(vus);
  m.serving.resize(vus);
  m.backhaul.resize(vus);
  for (std::size_t i = 0; i < vus; ++i) {
    m.sinr[i] = sinr(i, channels, beams, noise_variance);
    m.rate[i] = rate(m.sinr[i], kappa);
    m.serving[i] = serving_count(beams, i);
    m.backhaul[i] = backhaul_consumption(m.serving[i], m.rate[i]);
  }
  return m;
}

bool meets_sinr_floor(const LinkMetrics& metrics, const PhyConfig& config) {
  for (std::size_t i = 0; i < metrics.size(); ++i)
    if (!(metrics.sinr[i] >= config.gamma_min_linear(i))) return false;
  return true;
}

double reward(const LinkMetrics& metrics, const PhyConfig& config) {
  if (!meets_sinr_floor(metrics, config)) return 0.0;
  double r = 0.0;
  for (std::size_t i = 0; i < metrics.size(); ++i) r += config.weight(i) * metrics.backhaul[i];
  return r;
}

LinkGains::LinkGains(const ChannelRealization& channels)
    : vus_(channels.vu_count()), aps_(channels.ap_count()) {
  gains_.resize(vus_ * vus_ * aps_);
  degenerate_.assign(aps_ * vus_, 0);
  std::vector<double> norms(vus_ * aps_);
  for (std::size_t i = 0; i < vus_; ++i)
    for (std::size_t j = 0; j < aps_; ++j) {
      norms[i * aps_ + j] = std::sqrt(squared_norm(channels.link(i, j).h));
      if (norms[i * aps_ + j] == 0.0) degenerate_[j * vus_ + i] = 1;
    }
  for (std::size_t i = 0; i < vus_; ++i)
    for (std::size_t k = 0; k < vus_; ++k)
      for (std::size_t j = 0; j < aps_; ++j) {
        const double n = norms[k * aps_ + j];
        gains_[(i * vus_ + k) * aps_ + j] =
            n == 0.0 ? Complex{0.0, 0.0}
                     : inner(channels.link(i, j).h, channels.link(k, j).h) / n;
      }
}

void LinkGains::sinr(std::span<const double> amplitude, double noise_variance,
                     std::span<double> out) const {
  for (std::size_t j = 0; j < aps_; ++j)
    for (std::size_t k = 0; k < vus_; ++k)
      if (degenerate_[j * vus_ + k] && amplitude[j * vus_ + k] > 0.0)
        throw DegenerateChannelError("LinkGains: zero channel with positive power");

  for (std::size_t i = 0; i < vus_; ++i) {
    double desired = 0.0;
    double interference = 0.0;
    for (std::size_t k = 0; k < vus_; ++k) {
      Complex acc{0.0, 0.0};
      for (std::size_t j = 0; j < aps_; ++j) acc += gain(i, k, j) * amplitude[j * vus_ + k];
      if (k == i)
        desired = std::norm(acc);
      else
        interference += std::norm(acc);
    }
    out[i] = desired / (noise_variance + interference);
  }
}

LinkMetrics LinkGains::metrics(const PowerPlan& plan, const Coverage& coverage,
                               double noise_variance, double kappa) const {
  std::vector<double> amplitude(aps_ * vus_, 0.0);
  LinkMetrics m;
  m.sinr.resize(vus_);
  m.rate.resize(vus_);
  m.serving.assign(vus_, 0);
  m.backhaul.resize(vus_);
  for (std::size_t j = 0; j < aps_; ++j)
    for (std::size_t i = 0; i < vus_; ++i) {
      const double p = coverage(i, j) ? plan.at(j, i) : 0.0;
      if (p > 0.0) {
        amplitude[j * vus_ + i] = std::sqrt(p);
        ++m.serving[i];
      }
    }
  sinr(amplitude, noise_variance, m.sinr);
  for (std::size_t i = 0; i < vus_; ++i) {
    m.rate[i] = rate(m.sinr[i], kappa);
    m.backhaul[i] = backhaul_consumption(m.serving[i], m.rate[i]);
  }
  return m;
}

RewardKernel::RewardKernel(const LinkGains& gains, const Coverage& coverage,
                           const PhyConfig& config, double noise_variance)
    : gains_(gains),
      coverage_(coverage),
      config_(config),
      noise_(noise_variance),
      vus_(gains.vu_count()),
      aps_(gains.ap_count()),
      gamma_min_(vus_),
      budget_(aps_),
      amplitude_(vus_ * aps_),
      sinr_(vus_),
      serving_(vus_) {
  for (std::size_t i = 0; i < vus_; ++i) gamma_min_[i] = config.gamma_min_linear(i);
  for (std::size_t j = 0; j < aps_; ++j) budget_[j] = config.p_max_mw(j);
}

bool RewardKernel::feasible(std::span<const double> mw) const {
  for (std::size_t i = 0; i < vus_; ++i) {
    bool served = false;
    for (std::size_t j = 0; j < aps_ && !served; ++j) served = coverage_(i, j) && mw[j * vus_ + i] > 0.0;
    if (!served) return false;
  }
  for (std::size_t j = 0; j < aps_; ++j) {
    double total = 0.0;
    for (std::size_t i = 0; i < vus_; ++i)
      if (coverage_(i, j)) total += mw[j * vus_ + i];
    if (total > budget_[j] * (1.0 + kBudgetSlack)) return false;
  }
  return true;
}

RewardKernel::Result RewardKernel::operator()(std::span<const double> mw) {
  Result out;
  out.feasible = feasible(mw);
  std::fill(serving_.begin(), serving_.end(), 0);
  for (std::size_t j = 0; j < aps_; ++j)
    for (std::size_t i = 0; i < vus_; ++i) {
      const double p = coverage_(i, j) ? mw[j * vus_ + i] : 0.0;
      amplitude_[j * vus_ + i] = p > 0.0 ? std::sqrt(p) : 0.0;
      if (p > 0.0) ++serving_[i];
    }
  gains_.sinr(amplitude_, noise_, sinr_);
  bool floor = true;
  for (std::size_t i = 0; i < vus_; ++i) floor = floor && sinr_[i] >= gamma_min_[i];
  out.success = out.feasible && floor;
  if (!out.success) return out;
  double r = 0.0;
  for (std::size_t i = 0; i < vus_; ++i)
    r += config_.weight(i) * backhaul_consumption(serving_[i], rate(sinr_[i], config_.kappa));
  out.reward = r;
  return out;
}

}  // namespace vcell::phy
