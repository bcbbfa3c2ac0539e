#include "uavirl/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json_util.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/rng.hpp"
#include "uavirl/world.hpp"

namespace uavirl {

using detail::format_double;
using detail::ojson;
using detail::parse_double;
using detail::require;

std::vector<int> ScenarioConfig::default_density_map() {
  // Row 0 is the southern edge; the north-west block is the dense district.
  return {
      1, 1, 1, 1, 1,  // row 0
      1, 2, 1, 1, 1,  // row 1
      2, 7, 5, 1, 1,  // row 2
      8, 9, 6, 2, 1,  // row 3
      6, 8, 5, 2, 1,  // row 4
  };
}

std::string channel_mode_name(channel::ChannelMode mode) {
  return mode == channel::ChannelMode::LosOnly ? "los" : "probabilistic";
}

channel::ChannelMode parse_channel_mode(const std::string& name) {
  if (name == "los") return channel::ChannelMode::LosOnly;
  if (name == "probabilistic") return channel::ChannelMode::Probabilistic;
  throw ConfigError("channel mode must be 'probabilistic' or 'los', got '" + name + "'");
}

void validate_config(const ScenarioConfig& c) {
  auto require_that = [](bool ok, const std::string& what) {
    if (!ok) throw ConfigError("scenario: " + what);
  };
  require_that(c.grid_cols > 0 && c.grid_rows > 0, "grid_cols and grid_rows must be > 0");
  require_that(c.grid_cols * c.grid_rows >= 2, "grid must have at least 2 cells (source != dest)");
  require_that(c.cell_radius_m > 0.0, "cell_radius_m must be > 0");
  require_that(c.uav_height_m > 0.0, "uav_height_m must be > 0");
  require_that(c.ue_height_m > 0.0, "ue_height_m must be > 0");
  require_that(c.dist_limit >= 1, "dist_limit must be >= 1");
  require_that(c.throughput_threshold_bps >= 0.0, "throughput_threshold_bps must be >= 0");
  require_that(c.p_min_w > 0.0 && c.p_max_w >= c.p_min_w, "p_min_w/p_max_w must satisfy 0 < p_min <= p_max");
  for (std::size_t i = 0; i < c.power_levels_w.size(); ++i) {
    require_that(c.power_levels_w[i] >= c.p_min_w && c.power_levels_w[i] <= c.p_max_w,
                 "power_levels_w must lie within [p_min_w, p_max_w]");
    if (i > 0) require_that(c.power_levels_w[i] > c.power_levels_w[i - 1], "power_levels_w must be strictly ascending");
  }
  const HexGrid grid(c.grid_cols, c.grid_rows);
  require_that(grid.contains(offset_to_axial(c.source)), "source is off the grid");
  require_that(grid.contains(offset_to_axial(c.dest)), "dest is off the grid");
  require_that(!(c.source == c.dest), "source and dest must differ");
  require_that(c.ue_count_per_cell.size() == static_cast<std::size_t>(grid.size()),
               "ue_count_per_cell must have one entry per cell");
  require_that(std::all_of(c.ue_count_per_cell.begin(), c.ue_count_per_cell.end(), [](int n) { return n >= 0; }),
               "ue_count_per_cell entries must be >= 0");
  c.channel.validate();
}

bool point_in_hexagon(Point2 p, Point2 center, double radius_m) {
  // Flat-top hexagon with circumradius R.
  const double dx = std::abs(p.x - center.x);
  const double dy = std::abs(p.y - center.y);
  const double half_height = std::sqrt(3.0) / 2.0 * radius_m;
  const double tol = 1e-9 * radius_m;
  return dy <= half_height + tol && dx <= radius_m - dy / std::sqrt(3.0) + tol;
}

Scenario::Scenario(ScenarioConfig config, std::uint64_t seed, std::vector<std::vector<Point2>> ues)
    : config_(std::move(config)), grid_(config_.grid_cols, config_.grid_rows), seed_(seed),
      ue_placements_(std::move(ues)) {}

namespace {

ScenarioConfig with_defaults(ScenarioConfig config) {
  if (config.ue_count_per_cell.empty() && config.grid_cols == 5 && config.grid_rows == 5) {
    config.ue_count_per_cell = ScenarioConfig::default_density_map();
  }
  return config;
}

}  // namespace

Scenario Scenario::build(const ScenarioConfig& raw, std::uint64_t seed) {
  ScenarioConfig config = with_defaults(raw);
  validate_config(config);
  const HexGrid grid(config.grid_cols, config.grid_rows);
  Rng rng(derive_seed(seed, "ue-placement"));
  const double r = config.cell_radius_m;
  const double half_height = std::sqrt(3.0) / 2.0 * r;
  std::vector<std::vector<Point2>> ues(static_cast<std::size_t>(grid.size()));
  for (int i = 0; i < grid.size(); ++i) {
    const auto c = grid.center(grid.cell_at(i), r);
    const Point2 center{c[0], c[1]};
    auto& cell_ues = ues[static_cast<std::size_t>(i)];
    while (static_cast<int>(cell_ues.size()) < config.ue_count_per_cell[static_cast<std::size_t>(i)]) {
      const Point2 p{center.x + rng.uniform(-r, r), center.y + rng.uniform(-half_height, half_height)};
      if (point_in_hexagon(p, center, r)) cell_ues.push_back(p);
    }
  }
  Scenario s(std::move(config), seed, std::move(ues));
  s.finalize();
  return s;
}

Scenario Scenario::from_parts(const ScenarioConfig& raw, std::uint64_t seed,
                              std::vector<std::vector<Point2>> ue_placements) {
  ScenarioConfig config = with_defaults(raw);
  validate_config(config);
  Scenario s(std::move(config), seed, std::move(ue_placements));
  if (s.ue_placements_.size() != static_cast<std::size_t>(s.grid_.size()))
    throw ConfigError("scenario: ue_placements must have one list per cell");
  for (int i = 0; i < s.grid_.size(); ++i) {
    const auto& list = s.ue_placements_[static_cast<std::size_t>(i)];
    if (static_cast<int>(list.size()) != s.config_.ue_count_per_cell[static_cast<std::size_t>(i)])
      throw ConfigError("scenario: ue_placements size disagrees with ue_count_per_cell at cell " + std::to_string(i));
    const auto c = s.grid_.center(s.grid_.cell_at(i), s.config_.cell_radius_m);
    for (const Point2& p : list) {
      if (!point_in_hexagon(p, {c[0], c[1]}, s.config_.cell_radius_m))
        throw ConfigError("scenario: UE outside its hexagon at cell " + std::to_string(i));
    }
  }
  s.finalize();
  return s;
}

void Scenario::finalize() {
  bs_positions_.clear();
  for (int i = 0; i < grid_.size(); ++i) {
    const auto c = grid_.center(grid_.cell_at(i), config_.cell_radius_m);
    bs_positions_.push_back({c[0], c[1]});
  }

  scales_.max_hex_distance = std::max(1, grid_.max_distance());
  // Best-case uplink: full power straight down under LoS.
  {
    const channel::LinkGeometry overhead{0.0, config_.uav_height_m};
    const double gain =
        channel::channel_gain(channel::pathloss_los(overhead, config_.channel), config_.channel.uav_antenna_gain);
    scales_.max_throughput_bps = channel::throughput(config_.p_max_w, gain, config_.channel);
  }
  // Worst achievable aggregate interference at full power.
  scales_.max_interference_w = 0.0;
  for (int i = 0; i < grid_.size(); ++i) {
    scales_.max_interference_w =
        std::max(scales_.max_interference_w, world::aggregate_interference(*this, grid_.cell_at(i), config_.p_max_w));
  }

  links_.assign(static_cast<std::size_t>(grid_.size() * kNumPowerLevels), CellLink{});
  for (int i = 0; i < grid_.size(); ++i) {
    for (int p = 0; p < kNumPowerLevels; ++p) {
      const StepMetrics m = world::link_metrics(*this, grid_.cell_at(i), power_level(p));
      links_[static_cast<std::size_t>(i * kNumPowerLevels + p)] = {m.throughput_bps, m.interference_w, m.snr};
    }
  }

  id_.clear();
  id_ = detail::hex64(fnv1a64(scenario_to_json(*this)));
}

int Scenario::total_ues() const {
  return std::accumulate(config_.ue_count_per_cell.begin(), config_.ue_count_per_cell.end(), 0);
}

Scenario Scenario::with_channel_mode(channel::ChannelMode mode) const {
  ScenarioConfig c = config_;
  c.channel.channel_mode = mode;
  return from_parts(c, seed_, ue_placements_);
}

// ---- serialization -------------------------------------------------------

namespace {

ojson channel_to_json(const channel::ChannelParams& p) {
  ojson j;
  j["carrier_freq_hz"] = format_double(p.carrier_freq_hz);
  j["eta_los_db"] = format_double(p.eta_los_db);
  j["eta_nlos_db"] = format_double(p.eta_nlos_db);
  j["c1"] = format_double(p.c1);
  j["c2"] = format_double(p.c2);
  j["noise_power_w"] = format_double(p.noise_power_w);
  j["rb_bandwidth_hz"] = format_double(p.rb_bandwidth_hz);
  j["num_rbs"] = p.num_rbs;
  j["uav_antenna_gain"] = format_double(p.uav_antenna_gain);
  j["ue_tx_power_w"] = format_double(p.ue_tx_power_w);
  j["channel_mode"] = channel_mode_name(p.channel_mode);
  return j;
}

channel::ChannelParams channel_from_json(const ojson& j, const channel::ChannelParams& defaults, bool strict) {
  channel::ChannelParams p = defaults;
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = parse_double(j.at(key), key);
    else if (strict) throw CorruptRecordError(std::string("missing field 'channel.") + key + "'");
  };
  num("carrier_freq_hz", p.carrier_freq_hz);
  num("eta_los_db", p.eta_los_db);
  num("eta_nlos_db", p.eta_nlos_db);
  num("c1", p.c1);
  num("c2", p.c2);
  num("noise_power_w", p.noise_power_w);
  if (j.contains("noise_power_dbm")) p.noise_power_w = channel::dbm_to_watts(parse_double(j.at("noise_power_dbm"), "noise_power_dbm"));
  num("rb_bandwidth_hz", p.rb_bandwidth_hz);
  if (j.contains("num_rbs")) p.num_rbs = j.at("num_rbs").get<int>();
  num("uav_antenna_gain", p.uav_antenna_gain);
  num("ue_tx_power_w", p.ue_tx_power_w);
  if (j.contains("channel_mode")) p.channel_mode = parse_channel_mode(j.at("channel_mode").get<std::string>());
  return p;
}

ojson config_to_ojson(const ScenarioConfig& c) {
  ojson j;
  j["grid_cols"] = c.grid_cols;
  j["grid_rows"] = c.grid_rows;
  j["cell_radius_m"] = format_double(c.cell_radius_m);
  j["uav_height_m"] = format_double(c.uav_height_m);
  j["ue_height_m"] = format_double(c.ue_height_m);
  ojson levels = ojson::array();
  for (double p : c.power_levels_w) levels.push_back(format_double(p));
  j["power_levels_w"] = levels;
  j["p_min_w"] = format_double(c.p_min_w);
  j["p_max_w"] = format_double(c.p_max_w);
  j["dist_limit"] = c.dist_limit;
  j["throughput_threshold_bps"] = format_double(c.throughput_threshold_bps);
  j["source"] = {{"col", c.source.col}, {"row", c.source.row}};
  j["dest"] = {{"col", c.dest.col}, {"row", c.dest.row}};
  j["ue_count_per_cell"] = c.ue_count_per_cell;
  j["channel"] = channel_to_json(c.channel);
  return j;
}

// Missing keys fall back to defaults unless strict.
ScenarioConfig config_from_ojson(const ojson& j, bool strict) {
  ScenarioConfig c;
  if (!j.is_object()) throw ConfigError("scenario config must be a JSON object");
  auto int_field = [&](const char* key, int& out) {
    if (j.contains(key)) out = j.at(key).get<int>();
    else if (strict) throw CorruptRecordError(std::string("missing field '") + key + "'");
  };
  auto num = [&](const char* key, double& out) {
    if (j.contains(key)) out = parse_double(j.at(key), key);
    else if (strict) throw CorruptRecordError(std::string("missing field '") + key + "'");
  };
  auto cell = [&](const char* key, OffsetCoord& out) {
    if (j.contains(key)) {
      out.col = require(j.at(key), "col").get<int>();
      out.row = require(j.at(key), "row").get<int>();
    } else if (strict) {
      throw CorruptRecordError(std::string("missing field '") + key + "'");
    }
  };
  int_field("grid_cols", c.grid_cols);
  int_field("grid_rows", c.grid_rows);
  num("cell_radius_m", c.cell_radius_m);
  num("uav_height_m", c.uav_height_m);
  num("ue_height_m", c.ue_height_m);
  if (j.contains("power_levels_w")) {
    const auto& arr = j.at("power_levels_w");
    if (!arr.is_array() || arr.size() != kNumPowerLevels)
      throw ConfigError("scenario: power_levels_w must have exactly 6 entries");
    for (std::size_t i = 0; i < kNumPowerLevels; ++i) c.power_levels_w[i] = parse_double(arr[i], "power_levels_w");
  } else if (strict) {
    throw CorruptRecordError("missing field 'power_levels_w'");
  }
  num("p_min_w", c.p_min_w);
  num("p_max_w", c.p_max_w);
  int_field("dist_limit", c.dist_limit);
  num("throughput_threshold_bps", c.throughput_threshold_bps);
  cell("source", c.source);
  cell("dest", c.dest);
  if (j.contains("ue_count_per_cell")) c.ue_count_per_cell = j.at("ue_count_per_cell").get<std::vector<int>>();
  else if (strict) throw CorruptRecordError("missing field 'ue_count_per_cell'");
  if (j.contains("channel")) c.channel = channel_from_json(j.at("channel"), c.channel, strict);
  else if (strict) throw CorruptRecordError("missing field 'channel'");
  return c;
}

}  // namespace

std::string config_to_json(const ScenarioConfig& config) { return config_to_ojson(config).dump(2) + "\n"; }

ScenarioConfig config_from_json(const std::string& text) {
  try {
    return config_from_ojson(ojson::parse(text), false);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("scenario config: ") + e.what());
  }
}

std::string scenario_to_json(const Scenario& s) {
  ojson j;
  j["schema_version"] = 1;
  j["seed"] = std::to_string(s.seed());
  j["config"] = config_to_ojson(s.config());
  ojson bs = ojson::array();
  for (const Point2& p : s.bs_positions()) bs.push_back({format_double(p.x), format_double(p.y)});
  j["bs_positions"] = bs;
  ojson ues = ojson::array();
  for (const auto& cell : s.ue_placements()) {
    ojson list = ojson::array();
    for (const Point2& p : cell) list.push_back({format_double(p.x), format_double(p.y)});
    ues.push_back(list);
  }
  j["ue_placements"] = ues;
  if (!s.id().empty()) j["scenario_id"] = s.id();
  return j.dump(2) + "\n";
}

Scenario scenario_from_json(const std::string& text) {
  ojson j;
  try {
    j = ojson::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("scenario: ") + e.what());
  }
  try {
    if (require(j, "schema_version").get<int>() != 1) throw CorruptRecordError("scenario: unsupported schema_version");
    const std::uint64_t seed = std::stoull(require(j, "seed").get<std::string>());
    const ScenarioConfig config = config_from_ojson(require(j, "config"), true);
    std::vector<std::vector<Point2>> ues;
    for (const auto& cell : require(j, "ue_placements")) {
      std::vector<Point2> list;
      for (const auto& p : cell) list.push_back({parse_double(p.at(0), "ue.x"), parse_double(p.at(1), "ue.y")});
      ues.push_back(std::move(list));
    }
    Scenario s = Scenario::from_parts(config, seed, std::move(ues));
    if (j.contains("scenario_id") && j.at("scenario_id").get<std::string>() != s.id())
      throw CorruptRecordError("scenario: scenario_id does not match content");
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("scenario: ") + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::string& path) {
  detail::write_file(path, scenario_to_json(scenario));
}

Scenario load_scenario(const std::string& path) { return scenario_from_json(detail::read_file(path)); }

}  // namespace uavirl
