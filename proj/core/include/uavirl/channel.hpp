#pragma once

// Air-to-ground propagation, link quality and interference primitives.
// All functions are pure.

namespace uavirl::channel {

enum class ChannelMode { Probabilistic, LosOnly };

struct ChannelParams {
  double carrier_freq_hz = 2e9;
  double eta_los_db = 1.6;
  double eta_nlos_db = 23.0;
  double c1 = 12.076;
  double c2 = 0.114;
  double noise_power_w = 1e-12;  // -90 dBm per resource block
  double rb_bandwidth_hz = 1e6;
  int num_rbs = 1;
  double uav_antenna_gain = 100.0;
  double ue_tx_power_w = 0.002;
  ChannelMode channel_mode = ChannelMode::Probabilistic;

  // Throws ConfigError naming the offending field.
  void validate() const;
};

// Distances are horizontal (ground-projected); slant distance is derived.
struct LinkGeometry {
  double horizontal_dist_m = 0.0;
  double uav_height_m = 0.0;

  double slant_dist_m() const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Free-space term plus excess loss: 20log10(d) + 20log10(f) - 147.55 + eta.
// Throws std::domain_error when the slant distance is zero.
double pathloss_los(const LinkGeometry& geom, const ChannelParams& params);
double pathloss_nlos(const LinkGeometry& geom, const ChannelParams& params);

// Elevation-angle LoS probability. Overhead (horizontal distance 0) uses 90 degrees.
double p_los(const LinkGeometry& geom, const ChannelParams& params);

// LoS/NLoS mixture weighted by p_los, or pure LoS in LosOnly mode.
double pathloss_total(const LinkGeometry& geom, const ChannelParams& params);

// Mixture with an explicit LoS probability, used for testing the combination rule.
double pathloss_mixture(const LinkGeometry& geom, const ChannelParams& params, double los_probability);

// G * 10^(-pathloss/10).
double channel_gain(double pathloss_db, double antenna_gain);

// Per-RB SNR P*h/N0.
double snr_uplink(double tx_power_w, double gain, const ChannelParams& params);

// Sum over K resource blocks of B*log2(1+SNR_k), with power split evenly across blocks.
double throughput(double tx_power_w, double gain, const ChannelParams& params);

// Interference one UAV transmission puts on a neighbor BS: P*h.
double interference_contribution(double tx_power_w, double gain_to_neighbor_bs);

struct UeLinkQuality {
  double sinr = 0.0;
  double throughput_bps = 0.0;
};

// Terrestrial UE uplink under UAV interference. Uses the UE's full bandwidth
// (num_rbs * rb_bandwidth_hz).
UeLinkQuality ue_sinr_throughput(double ue_tx_power_w, double ue_gain, double interference_w,
                                 const ChannelParams& params);

}  // namespace uavirl::channel
