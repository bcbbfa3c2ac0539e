#include "uavirl/world.hpp"

#include <algorithm>
#include <cmath>

#include "uavirl/channel.hpp"
#include "uavirl/errors.hpp"

namespace uavirl {

Action Action::from_joint(int index) {
  if (index < 0 || index >= kNumActions) throw ContractError("action index out of range");
  return {static_cast<Direction>(index / kNumPowerLevels), index % kNumPowerLevels};
}

namespace world {

UavState reset(const Scenario& scenario) { return reset_at(scenario, scenario.source_cell()); }

UavState reset_at(const Scenario& scenario, CellCoord start) {
  if (!scenario.grid().contains(start)) throw ConfigError("start cell is off the grid");
  return {start, 0, start == scenario.dest_cell()};
}

FeatureVector initial_features(const Scenario& scenario, const UavState& state) {
  StepMetrics none;
  none.hex_dist_to_dest = hex_distance(state.cell, scenario.dest_cell());
  none.serving_bs = scenario.grid().index_of(state.cell);
  return compute_features(scenario, state, none);
}

double uav_to_bs_gain(const Scenario& scenario, CellCoord uav_cell, CellCoord bs_cell) {
  const auto& grid = scenario.grid();
  const Point2 uav = scenario.bs_position(grid.index_of(uav_cell));
  const Point2 bs = scenario.bs_position(grid.index_of(bs_cell));
  const channel::LinkGeometry geom{std::hypot(uav.x - bs.x, uav.y - bs.y), scenario.uav_height_m()};
  return channel::channel_gain(channel::pathloss_total(geom, scenario.channel()), scenario.channel().uav_antenna_gain);
}

double aggregate_interference(const Scenario& scenario, CellCoord cell, double tx_power_w) {
  const auto& grid = scenario.grid();
  double total = 0.0;
  for (Direction d : kAllDirections) {
    const auto n = grid.adjacent(cell, d);
    if (!n) continue;
    const int count = scenario.ue_count(grid.index_of(*n));
    if (count == 0) continue;
    total += count * channel::interference_contribution(tx_power_w, uav_to_bs_gain(scenario, cell, *n));
  }
  return total;
}

StepMetrics link_metrics(const Scenario& scenario, CellCoord cell, double tx_power_w) {
  StepMetrics m;
  const double gain = uav_to_bs_gain(scenario, cell, cell);
  m.serving_bs = scenario.grid().index_of(cell);
  m.snr = channel::snr_uplink(tx_power_w / scenario.channel().num_rbs, gain, scenario.channel());
  m.throughput_bps = channel::throughput(tx_power_w, gain, scenario.channel());
  m.interference_w = aggregate_interference(scenario, cell, tx_power_w);
  m.hex_dist_to_dest = hex_distance(cell, scenario.dest_cell());
  return m;
}

StepResult step(const Scenario& scenario, const UavState& state, Action action) {
  if (state.done) throw ContractError("step: episode already finished");
  if (action.power_idx < 0 || action.power_idx >= kNumPowerLevels) throw ContractError("step: power index out of range");
  const auto& grid = scenario.grid();

  StepResult out;
  out.state.cell = grid.neighbor(state.cell, action.move_dir);
  out.state.hops_used = state.hops_used + 1;
  out.state.done = out.state.cell == scenario.dest_cell() || out.state.hops_used >= scenario.dist_limit();

  const int idx = grid.index_of(out.state.cell);
  const CellLink& link = scenario.link(idx, action.power_idx);
  out.metrics.throughput_bps = link.throughput_bps;
  out.metrics.interference_w = link.interference_w;
  out.metrics.snr = link.snr;
  out.metrics.serving_bs = idx;
  out.metrics.hex_dist_to_dest = hex_distance(out.state.cell, scenario.dest_cell());
  out.features = compute_features(scenario, out.state, out.metrics);
  return out;
}

FeatureVector compute_features(const Scenario& scenario, const UavState& new_state, const StepMetrics& metrics) {
  const FeatureScales& s = scenario.scales();
  FeatureVector phi{};
  phi[0] = static_cast<double>(metrics.hex_dist_to_dest) / s.max_hex_distance;
  phi[1] = static_cast<double>(new_state.hops_used) / scenario.dist_limit();
  phi[2] = new_state.cell == scenario.dest_cell() ? 1.0 : 0.0;
  phi[3] = std::min(metrics.throughput_bps / s.max_throughput_bps, 1.0);
  phi[4] = s.max_interference_w > 0.0 ? std::min(metrics.interference_w / s.max_interference_w, 1.0) : 0.0;
  return phi;
}

std::vector<UeReport> ue_link_report(const Scenario& scenario, CellCoord cell, double tx_power_w) {
  const auto& grid = scenario.grid();
  const auto& params = scenario.channel();
  std::vector<UeReport> out;
  for (Direction d : kAllDirections) {
    const auto n = grid.adjacent(cell, d);
    if (!n) continue;
    const int nidx = grid.index_of(*n);
    const Point2 bs = scenario.bs_position(nidx);
    const double interference =
        channel::interference_contribution(tx_power_w, uav_to_bs_gain(scenario, cell, *n));
    const auto& ues = scenario.ue_placements()[static_cast<std::size_t>(nidx)];
    for (std::size_t u = 0; u < ues.size(); ++u) {
      // Terrestrial UE-to-BS link: NLoS, unit antenna gain.
      const channel::LinkGeometry geom{std::hypot(ues[u].x - bs.x, ues[u].y - bs.y),
                                       scenario.config().ue_height_m};
      const double ue_gain = channel::channel_gain(channel::pathloss_nlos(geom, params), 1.0);
      const auto q = channel::ue_sinr_throughput(params.ue_tx_power_w, ue_gain, interference, params);
      out.push_back({nidx, static_cast<int>(u), interference, q.sinr, q.throughput_bps});
    }
  }
  return out;
}

}  // namespace world
}  // namespace uavirl
