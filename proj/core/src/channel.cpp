#include "uavirl/channel.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "uavirl/errors.hpp"

namespace uavirl::channel {

void ChannelParams::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("channel: ") + what);
  };
  require(carrier_freq_hz > 0.0, "carrier_freq_hz must be > 0");
  require(rb_bandwidth_hz > 0.0, "rb_bandwidth_hz must be > 0");
  require(num_rbs >= 1, "num_rbs must be >= 1");
  require(eta_nlos_db > eta_los_db, "eta_nlos_db must exceed eta_los_db");
  require(noise_power_w > 0.0, "noise_power_w must be > 0");
  require(c1 > 0.0, "c1 must be > 0");
  require(c2 > 0.0, "c2 must be > 0");
  require(uav_antenna_gain > 0.0, "uav_antenna_gain must be > 0");
  require(ue_tx_power_w >= 0.0, "ue_tx_power_w must be >= 0");
}

double LinkGeometry::slant_dist_m() const { return std::hypot(horizontal_dist_m, uav_height_m); }

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

namespace {

double free_space_term(const LinkGeometry& geom, const ChannelParams& params) {
  const double d = geom.slant_dist_m();
  if (!(d > 0.0)) throw std::domain_error("pathloss: slant distance must be > 0");
  return 20.0 * std::log10(d) + 20.0 * std::log10(params.carrier_freq_hz) - 147.55;
}

}  // namespace

double pathloss_los(const LinkGeometry& geom, const ChannelParams& params) {
  return free_space_term(geom, params) + params.eta_los_db;
}

double pathloss_nlos(const LinkGeometry& geom, const ChannelParams& params) {
  return free_space_term(geom, params) + params.eta_nlos_db;
}

double p_los(const LinkGeometry& geom, const ChannelParams& params) {
  const double elevation_deg =
      geom.horizontal_dist_m > 0.0
          ? (180.0 / std::numbers::pi) * std::atan(geom.uav_height_m / geom.horizontal_dist_m)
          : 90.0;
  return 1.0 / (1.0 + params.c1 * std::exp(-params.c2 * (elevation_deg - params.c1)));
}

double pathloss_mixture(const LinkGeometry& geom, const ChannelParams& params, double los_probability) {
  return los_probability * pathloss_los(geom, params) +
         (1.0 - los_probability) * pathloss_nlos(geom, params);
}

double pathloss_total(const LinkGeometry& geom, const ChannelParams& params) {
  if (params.channel_mode == ChannelMode::LosOnly) return pathloss_los(geom, params);
  return pathloss_mixture(geom, params, p_los(geom, params));
}

double channel_gain(double pathloss_db, double antenna_gain) {
  return antenna_gain * std::pow(10.0, -pathloss_db / 10.0);
}

double snr_uplink(double tx_power_w, double gain, const ChannelParams& params) {
  return tx_power_w * gain / params.noise_power_w;
}

double throughput(double tx_power_w, double gain, const ChannelParams& params) {
  const double per_rb_power = tx_power_w / params.num_rbs;
  const double per_rb = params.rb_bandwidth_hz * std::log2(1.0 + snr_uplink(per_rb_power, gain, params));
  return per_rb * params.num_rbs;
}

double interference_contribution(double tx_power_w, double gain_to_neighbor_bs) {
  return tx_power_w * gain_to_neighbor_bs;
}

UeLinkQuality ue_sinr_throughput(double ue_tx_power_w, double ue_gain, double interference_w,
                                 const ChannelParams& params) {
  UeLinkQuality q;
  q.sinr = ue_tx_power_w * ue_gain / (interference_w + params.noise_power_w);
  q.throughput_bps = params.rb_bandwidth_hz * params.num_rbs * std::log2(1.0 + q.sinr);
  return q;
}

}  // namespace uavirl::channel
