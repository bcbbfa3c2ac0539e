#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "uavirl/channel.hpp"
#include "uavirl/hex.hpp"

namespace uavirl {

inline constexpr int kNumPowerLevels = 6;

struct Point2 {
  double x = 0.0;
  double y = 0.0;

  friend bool operator==(const Point2&, const Point2&) = default;
};

// User-facing description of a scenario before UE placement.
struct ScenarioConfig {
  int grid_cols = 5;
  int grid_rows = 5;
  double cell_radius_m = 100.0;
  double uav_height_m = 50.0;
  double ue_height_m = 1.5;
  std::array<double, kNumPowerLevels> power_levels_w = {0.05, 0.08, 0.11, 0.14, 0.17, 0.20};
  double p_min_w = 0.05;
  double p_max_w = 0.20;
  int dist_limit = 15;
  double throughput_threshold_bps = 15.0e6;
  OffsetCoord source{0, 0};
  OffsetCoord dest{4, 4};
  // Row-major (row 0 at the south edge). Empty means the default density map.
  std::vector<int> ue_count_per_cell;
  channel::ChannelParams channel;

  // The 5x5 layout with a dense north-west block: 75 UEs.
  static std::vector<int> default_density_map();
};

// Normalization constants for the feature vector.
struct FeatureScales {
  double max_hex_distance = 1.0;
  double max_throughput_bps = 1.0;
  double max_interference_w = 0.0;
};

// Precomputed link metrics for a UAV hovering over one cell at one power level.
struct CellLink {
  double throughput_bps = 0.0;
  double interference_w = 0.0;
  double snr = 0.0;
};

// Immutable, fully placed scenario.
class Scenario {
 public:
  // Validates and places UEs deterministically from the seed.
  static Scenario build(const ScenarioConfig& config, std::uint64_t seed);
  // Reconstructs from explicit placements (deserialization path).
  static Scenario from_parts(const ScenarioConfig& config, std::uint64_t seed,
                             std::vector<std::vector<Point2>> ue_placements);

  const ScenarioConfig& config() const { return config_; }
  const HexGrid& grid() const { return grid_; }
  const channel::ChannelParams& channel() const { return config_.channel; }
  std::uint64_t seed() const { return seed_; }

  int num_cells() const { return grid_.size(); }
  CellCoord source_cell() const { return offset_to_axial(config_.source); }
  CellCoord dest_cell() const { return offset_to_axial(config_.dest); }
  int dist_limit() const { return config_.dist_limit; }
  double power_level(int idx) const { return config_.power_levels_w.at(static_cast<std::size_t>(idx)); }
  double uav_height_m() const { return config_.uav_height_m; }

  Point2 bs_position(int cell_index) const { return bs_positions_.at(static_cast<std::size_t>(cell_index)); }
  const std::vector<Point2>& bs_positions() const { return bs_positions_; }
  const std::vector<std::vector<Point2>>& ue_placements() const { return ue_placements_; }
  int ue_count(int cell_index) const { return config_.ue_count_per_cell.at(static_cast<std::size_t>(cell_index)); }
  int total_ues() const;

  const FeatureScales& scales() const { return scales_; }
  const CellLink& link(int cell_index, int power_idx) const {
    return links_[static_cast<std::size_t>(cell_index * kNumPowerLevels + power_idx)];
  }

  // Content hash of the canonical serialization.
  const std::string& id() const { return id_; }

  // Copy with a different channel mode; UE placements are kept.
  Scenario with_channel_mode(channel::ChannelMode mode) const;

 private:
  Scenario(ScenarioConfig config, std::uint64_t seed, std::vector<std::vector<Point2>> ues);
  void finalize();

  ScenarioConfig config_;
  HexGrid grid_;
  std::uint64_t seed_ = 0;
  std::vector<Point2> bs_positions_;
  std::vector<std::vector<Point2>> ue_placements_;
  FeatureScales scales_;
  std::vector<CellLink> links_;
  std::string id_;
};

// Throws ConfigError with the offending field name.
void validate_config(const ScenarioConfig& config);

bool point_in_hexagon(Point2 p, Point2 center, double radius_m);

std::string channel_mode_name(channel::ChannelMode mode);
channel::ChannelMode parse_channel_mode(const std::string& name);

}  // namespace uavirl

namespace uavirl {

// Canonical JSON: fixed field order, floats written as decimal strings with
// 17 significant digits so that a reload is bit-identical.
std::string scenario_to_json(const Scenario& scenario);
Scenario scenario_from_json(const std::string& text);

ScenarioConfig config_from_json(const std::string& text);
std::string config_to_json(const ScenarioConfig& config);

void save_scenario(const Scenario& scenario, const std::string& path);
Scenario load_scenario(const std::string& path);

}  // namespace uavirl
