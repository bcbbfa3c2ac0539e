#pragma once

#include <array>
#include <vector>

#include "uavirl/hex.hpp"
#include "uavirl/scenario.hpp"

namespace uavirl {

inline constexpr int kNumFeatures = 5;
inline constexpr int kNumActions = kNumDirections * kNumPowerLevels;

// phi[0] distance to destination, phi[1] hops used, phi[2] success flag,
// phi[3] throughput, phi[4] aggregate interference. All in [0, 1].
using FeatureVector = std::array<double, kNumFeatures>;

struct Action {
  Direction move_dir = Direction::N;
  int power_idx = 0;

  int joint_index() const { return static_cast<int>(move_dir) * kNumPowerLevels + power_idx; }
  static Action from_joint(int index);

  friend bool operator==(const Action&, const Action&) = default;
};

struct UavState {
  CellCoord cell;
  int hops_used = 0;
  bool done = false;

  friend bool operator==(const UavState&, const UavState&) = default;
};

struct StepMetrics {
  double throughput_bps = 0.0;
  double interference_w = 0.0;
  int serving_bs = 0;
  double snr = 0.0;
  int hex_dist_to_dest = 0;
};

struct StepResult {
  UavState state;
  FeatureVector features{};
  StepMetrics metrics;
};

struct UeReport {
  int cell_index = 0;
  int ue_index = 0;
  double interference_w = 0.0;
  double sinr = 0.0;
  double throughput_bps = 0.0;
};

namespace world {

UavState reset(const Scenario& scenario);
UavState reset_at(const Scenario& scenario, CellCoord start);

// Observation before the first move: distance term only, no link yet.
FeatureVector initial_features(const Scenario& scenario, const UavState& state);

// Moves (clamped at the edge), associates with the new cell's BS and transmits.
// Throws ContractError when called on a finished state.
StepResult step(const Scenario& scenario, const UavState& state, Action action);

// Link metrics evaluated from channel primitives, bypassing the per-cell cache.
StepMetrics link_metrics(const Scenario& scenario, CellCoord cell, double tx_power_w);

// Gain from a UAV hovering over `uav_cell` to the BS of `bs_cell`.
double uav_to_bs_gain(const Scenario& scenario, CellCoord uav_cell, CellCoord bs_cell);

// Sum over on-grid adjacent cells of ue_count * P * h(neighbor BS). The
// serving cell contributes nothing.
double aggregate_interference(const Scenario& scenario, CellCoord cell, double tx_power_w);

FeatureVector compute_features(const Scenario& scenario, const UavState& new_state, const StepMetrics& metrics);

// Per-UE SINR and throughput in the adjacent cells while the UAV transmits.
std::vector<UeReport> ue_link_report(const Scenario& scenario, CellCoord cell, double tx_power_w);

}  // namespace world
}  // namespace uavirl
