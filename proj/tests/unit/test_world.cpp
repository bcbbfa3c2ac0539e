#include <doctest.h>

#include <cmath>
#include <map>
#include <queue>
#include <set>

#include "uavirl/channel.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/hex.hpp"
#include "uavirl/rng.hpp"
#include "uavirl/scenario.hpp"
#include "uavirl/world.hpp"

using namespace uavirl;

namespace {

const Scenario& default_scenario() {
  static const Scenario s = Scenario::build(ScenarioConfig{}, 42);
  return s;
}

// Breadth-first distance over the neighbor graph.
int bfs_distance(const HexGrid& g, CellCoord a, CellCoord b) {
  std::map<int, int> dist{{g.index_of(a), 0}};
  std::queue<CellCoord> q;
  q.push(a);
  while (!q.empty()) {
    const CellCoord c = q.front();
    q.pop();
    if (c == b) return dist[g.index_of(c)];
    for (Direction d : kAllDirections) {
      const auto n = g.adjacent(c, d);
      if (n && !dist.count(g.index_of(*n))) {
        dist[g.index_of(*n)] = dist[g.index_of(c)] + 1;
        q.push(*n);
      }
    }
  }
  return -1;
}

// Interference recomputed per UE cell straight from the channel primitives.
double brute_interference(const Scenario& s, CellCoord cell, double p) {
  const double kSqrt3 = std::sqrt(3.0);
  const double R = s.config().cell_radius_m;
  const double ux = 1.5 * R * cell.q, uy = kSqrt3 * R * (cell.r + 0.5 * cell.q);
  double total = 0.0;
  for (int i = 0; i < s.num_cells(); ++i) {
    const CellCoord c = s.grid().cell_at(i);
    if (hex_distance(c, cell) != 1) continue;
    const double bx = 1.5 * R * c.q, by = kSqrt3 * R * (c.r + 0.5 * c.q);
    const channel::LinkGeometry g{std::hypot(ux - bx, uy - by), s.uav_height_m()};
    const double h = channel::channel_gain(channel::pathloss_total(g, s.channel()), s.channel().uav_antenna_gain);
    for (int u = 0; u < s.ue_count(i); ++u) total += p * h;
  }
  return total;
}

}  // namespace

TEST_CASE("hex distance matches BFS on the default grid") {
  const HexGrid g(5, 5);
  for (int i = 0; i < g.size(); ++i) {
    for (int j = 0; j < g.size(); ++j) {
      const int d = hex_distance(g.cell_at(i), g.cell_at(j));
      CHECK(d == bfs_distance(g, g.cell_at(i), g.cell_at(j)));
      CHECK(d == hex_distance(g.cell_at(j), g.cell_at(i)));
      if (i == j) CHECK(d == 0);
    }
  }
  CHECK(hex_distance(g.cell_at(0), g.cell_at(24)) == 6);
  for (int i = 0; i < g.size(); ++i)
    for (int j = 0; j < g.size(); ++j)
      for (int k = 0; k < g.size(); ++k)
        CHECK(hex_distance(g.cell_at(i), g.cell_at(k)) <=
              hex_distance(g.cell_at(i), g.cell_at(j)) + hex_distance(g.cell_at(j), g.cell_at(k)));
}

TEST_CASE("offset and axial coordinates") {
  const HexGrid g(5, 5);
  for (int i = 0; i < g.size(); ++i) {
    const CellCoord c = g.cell_at(i);
    CHECK(g.index_of(c) == i);
    const OffsetCoord o = axial_to_offset(c);
    CHECK(o.row * 5 + o.col == i);
    CHECK(offset_to_axial(o) == c);
  }
}

TEST_CASE("neighbors and clamping") {
  const HexGrid g(5, 5);
  int interior = 0;
  for (int i = 0; i < g.size(); ++i) {
    const CellCoord c = g.cell_at(i);
    std::set<int> distinct;
    bool all_on = true;
    for (Direction d : kAllDirections) {
      const auto n = g.adjacent(c, d);
      if (!n) {
        all_on = false;
        CHECK(g.neighbor(c, d) == c);
        continue;
      }
      CHECK(hex_distance(c, *n) == 1);
      CHECK(g.neighbor(*n, opposite(d)) == c);
      distinct.insert(g.index_of(*n));
    }
    if (all_on) {
      ++interior;
      CHECK(distinct.size() == 6);
    }
  }
  CHECK(interior > 0);
  // Top edge cell going north stays put.
  const CellCoord top = offset_to_axial({2, 4});
  CHECK(g.neighbor(top, Direction::N) == top);
  CHECK(parse_direction("SW") == Direction::SW);
  CHECK_FALSE(parse_direction("W").has_value());
}

TEST_CASE("scenario construction") {
  const Scenario& s = default_scenario();
  CHECK(s.num_cells() == 25);
  CHECK(s.total_ues() == 75);
  for (int i = 0; i < s.num_cells(); ++i) {
    CHECK(static_cast<int>(s.ue_placements()[static_cast<std::size_t>(i)].size()) == s.ue_count(i));
    for (const Point2& p : s.ue_placements()[static_cast<std::size_t>(i)])
      CHECK(point_in_hexagon(p, s.bs_position(i), s.config().cell_radius_m));
  }
  CHECK(s.grid().index_of(s.source_cell()) == 0);
  CHECK(s.grid().index_of(s.dest_cell()) == 24);

  const Scenario again = Scenario::build(ScenarioConfig{}, 42);
  CHECK(scenario_to_json(again) == scenario_to_json(s));
  CHECK(again.id() == s.id());

  const Scenario a = Scenario::build(ScenarioConfig{}, 1);
  const Scenario b = Scenario::build(ScenarioConfig{}, 2);
  CHECK(a.config().ue_count_per_cell == b.config().ue_count_per_cell);
  CHECK(a.ue_placements() != b.ue_placements());
}

TEST_CASE("scenario validation") {
  ScenarioConfig c;
  c.grid_cols = 1;
  c.grid_rows = 1;
  c.ue_count_per_cell = {1};
  c.dest = {0, 0};
  CHECK_THROWS_AS(Scenario::build(c, 1), ConfigError);

  ScenarioConfig bad_power;
  bad_power.power_levels_w = {0.05, 0.08, 0.08, 0.14, 0.17, 0.2};
  CHECK_THROWS_WITH_AS(Scenario::build(bad_power, 1), doctest::Contains("power_levels_w"), ConfigError);

  ScenarioConfig same;
  same.dest = same.source;
  CHECK_THROWS_AS(Scenario::build(same, 1), ConfigError);
}

TEST_CASE("scenario JSON round trip is bit-identical") {
  const Scenario& s = default_scenario();
  const std::string text = scenario_to_json(s);
  const Scenario back = scenario_from_json(text);
  CHECK(scenario_to_json(back) == text);
  CHECK(back.id() == s.id());
  CHECK(back.ue_placements() == s.ue_placements());
  CHECK_THROWS_AS(scenario_from_json("{\"schema_version\":1}"), CorruptRecordError);
  CHECK(s.with_channel_mode(channel::ChannelMode::LosOnly).id() != s.id());
}

TEST_CASE("step semantics") {
  const Scenario& s = default_scenario();
  const auto& g = s.grid();
  const CellCoord dest = s.dest_cell();

  // One hop south of the destination, move north.
  const CellCoord before = g.neighbor(dest, Direction::S);
  const StepResult r = world::step(s, {before, 3, false}, {Direction::N, 2});
  CHECK(r.state.cell == dest);
  CHECK(r.state.done);
  CHECK(r.state.hops_used == 4);
  CHECK(r.features[2] == 1.0);
  CHECK(r.features[0] == 0.0);

  // Budget exhaustion.
  const StepResult last = world::step(s, {s.source_cell(), s.dist_limit() - 1, false}, {Direction::N, 0});
  CHECK(last.state.done);
  CHECK(last.features[2] == 0.0);
  CHECK(last.features[1] == 1.0);

  CHECK_THROWS_AS(world::step(s, last.state, {Direction::N, 0}), ContractError);

  // Clamp still consumes a hop.
  const StepResult clamp = world::step(s, {s.source_cell(), 0, false}, {Direction::S, 0});
  CHECK(clamp.state.cell == s.source_cell());
  CHECK(clamp.state.hops_used == 1);
}

TEST_CASE("power monotonicity at identical geometry") {
  const Scenario& s = default_scenario();
  for (int i = 0; i < s.num_cells(); ++i) {
    for (Direction d : kAllDirections) {
      const UavState st{s.grid().cell_at(i), 0, false};
      if (st.cell == s.dest_cell()) continue;
      const auto lo = world::step(s, st, {d, 0});
      const auto hi = world::step(s, st, {d, 5});
      CHECK(hi.metrics.throughput_bps > lo.metrics.throughput_bps);
      if (lo.metrics.interference_w > 0) CHECK(hi.metrics.interference_w > lo.metrics.interference_w);
    }
  }
}

TEST_CASE("features lie in [0,1] for every cell and action") {
  for (auto mode : {channel::ChannelMode::Probabilistic, channel::ChannelMode::LosOnly}) {
    const Scenario s = default_scenario().with_channel_mode(mode);
    for (int i = 0; i < s.num_cells(); ++i) {
      const CellCoord c = s.grid().cell_at(i);
      if (c == s.dest_cell()) continue;
      for (int hops = 0; hops < s.dist_limit(); ++hops) {
        for (int a = 0; a < kNumActions; ++a) {
          const auto r = world::step(s, {c, hops, false}, Action::from_joint(a));
          for (double f : r.features) {
            CHECK(f >= 0.0);
            CHECK(f <= 1.0);
          }
          CHECK((r.features[2] == 0.0 || r.features[2] == 1.0));
        }
      }
    }
  }
}

TEST_CASE("feature boundary values") {
  const Scenario& s = default_scenario();
  StepMetrics m;
  m.hex_dist_to_dest = 0;
  const FeatureVector at_dest = world::compute_features(s, {s.dest_cell(), s.dist_limit(), true}, m);
  CHECK(at_dest[0] == 0.0);
  CHECK(at_dest[1] == 1.0);
  CHECK(at_dest[2] == 1.0);
  const StepMetrics zero = world::link_metrics(s, s.grid().cell_at(12), 0.0);
  const FeatureVector f = world::compute_features(s, {s.grid().cell_at(12), 1, false}, zero);
  CHECK(f[3] == 0.0);
  CHECK(f[4] == 0.0);
}

TEST_CASE("cached link table agrees with direct evaluation") {
  const Scenario& s = default_scenario();
  for (int i = 0; i < s.num_cells(); ++i) {
    for (int p = 0; p < kNumPowerLevels; ++p) {
      const StepMetrics m = world::link_metrics(s, s.grid().cell_at(i), s.power_level(p));
      CHECK(s.link(i, p).throughput_bps == m.throughput_bps);
      CHECK(s.link(i, p).interference_w == m.interference_w);
    }
  }
}

TEST_CASE("aggregate interference matches the per-UE brute-force sum") {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    ScenarioConfig c;
    c.grid_cols = 3;
    c.grid_rows = 3;
    c.dest = {2, 2};
    Rng rng(seed);
    for (int i = 0; i < 9; ++i) c.ue_count_per_cell.push_back(static_cast<int>(rng.below(5)));
    const Scenario s = Scenario::build(c, seed);
    for (int i = 0; i < 9; ++i) {
      for (double p : {0.05, 0.2}) {
        const double lib = world::aggregate_interference(s, s.grid().cell_at(i), p);
        const double ref = brute_interference(s, s.grid().cell_at(i), p);
        CHECK(lib == doctest::Approx(ref).epsilon(1e-12));
      }
    }
  }
  // Empty neighborhood and zero power.
  ScenarioConfig empty;
  empty.ue_count_per_cell.assign(25, 0);
  const Scenario e = Scenario::build(empty, 3);
  CHECK(world::aggregate_interference(e, e.grid().cell_at(12), 0.2) == 0.0);
  CHECK(world::aggregate_interference(default_scenario(), default_scenario().grid().cell_at(12), 0.0) == 0.0);
}

TEST_CASE("single adjacent cell with three UEs") {
  ScenarioConfig c;
  c.grid_cols = 2;
  c.grid_rows = 1;
  c.dest = {1, 0};
  c.ue_count_per_cell = {0, 3};
  const Scenario s = Scenario::build(c, 5);
  const double per_ue = 0.2 * world::uav_to_bs_gain(s, s.grid().cell_at(0), s.grid().cell_at(1));
  CHECK(world::aggregate_interference(s, s.grid().cell_at(0), 0.2) == doctest::Approx(3 * per_ue).epsilon(1e-15));
}

TEST_CASE("UE link report") {
  const Scenario& s = default_scenario();
  const CellCoord cell = s.grid().cell_at(12);
  const auto quiet = world::ue_link_report(s, cell, 0.0);
  const auto lo = world::ue_link_report(s, cell, 0.05);
  const auto hi = world::ue_link_report(s, cell, 0.2);
  REQUIRE(quiet.size() == lo.size());
  REQUIRE(quiet.size() > 0);
  for (std::size_t i = 0; i < quiet.size(); ++i) {
    CHECK(lo[i].sinr < quiet[i].sinr);
    CHECK(hi[i].sinr < lo[i].sinr);
  }

  // One UE: compose the channel functions by hand.
  ScenarioConfig c;
  c.grid_cols = 2;
  c.grid_rows = 1;
  c.dest = {1, 0};
  c.ue_count_per_cell = {0, 1};
  const Scenario one = Scenario::build(c, 9);
  const auto rep = world::ue_link_report(one, one.grid().cell_at(0), 0.11);
  REQUIRE(rep.size() == 1);
  const Point2 ue = one.ue_placements()[1][0];
  const Point2 bs = one.bs_position(1);
  const double hu = channel::channel_gain(
      channel::pathloss_nlos({std::hypot(ue.x - bs.x, ue.y - bs.y), 1.5}, one.channel()), 1.0);
  const double interference = 0.11 * world::uav_to_bs_gain(one, one.grid().cell_at(0), one.grid().cell_at(1));
  const auto q = channel::ue_sinr_throughput(one.channel().ue_tx_power_w, hu, interference, one.channel());
  CHECK(rep[0].sinr == q.sinr);
  CHECK(rep[0].throughput_bps == q.throughput_bps);
}

TEST_CASE("random walks stay on the grid and end within the hop budget") {
  const Scenario& s = default_scenario();
  Rng rng(2024);
  for (int walk = 0; walk < 10000; ++walk) {
    UavState st = world::reset(s);
    int steps = 0;
    while (!st.done) {
      const auto r = world::step(s, st, Action::from_joint(static_cast<int>(rng.below(kNumActions))));
      CHECK(r.state.hops_used == st.hops_used + 1);
      st = r.state;
      ++steps;
    }
    CHECK(s.grid().contains(st.cell));
    CHECK(steps <= s.dist_limit());
  }
}

TEST_CASE("step is deterministic") {
  const Scenario& s = default_scenario();
  const auto a = world::step(s, {s.grid().cell_at(7), 2, false}, {Direction::NE, 3});
  const auto b = world::step(s, {s.grid().cell_at(7), 2, false}, {Direction::NE, 3});
  CHECK(a.features == b.features);
  CHECK(a.metrics.throughput_bps == b.metrics.throughput_bps);
  CHECK(Action::from_joint(Action{Direction::SW, 4}.joint_index()) == Action{Direction::SW, 4});
  CHECK(Action{Direction::SW, 4}.joint_index() == 28);
}
