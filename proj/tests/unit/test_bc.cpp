#include <doctest.h>

#include <algorithm>
#include <functional>
#include <limits>
#include <set>

#include "uavirl/errors.hpp"
#include "uavirl/expert.hpp"
#include "uavirl/rng.hpp"
#include "uavirl/tree.hpp"

using namespace uavirl;
using namespace uavirl::bc;

namespace {

const Scenario& scen() {
  static const Scenario s = Scenario::build(ScenarioConfig{}, 42);
  return s;
}

Scenario small_grid(int cols, int rows, std::uint64_t seed) {
  Rng rng(seed);
  ScenarioConfig c;
  c.grid_cols = cols;
  c.grid_rows = rows;
  c.dest = {cols - 1, rows - 1};
  c.ue_count_per_cell.clear();
  for (int i = 0; i < cols * rows; ++i) c.ue_count_per_cell.push_back(static_cast<int>(rng.below(6)));
  return Scenario::build(c, seed);
}

LabeledState ls(FeatureVector f, int a) { return {f, a}; }

// Cheapest simple path by exhaustive enumeration.
double brute_force_cost(const Scenario& s, const ExpertOracleConfig& cfg) {
  const auto& grid = s.grid();
  const double thr = s.config().throughput_threshold_bps;
  double best = std::numeric_limits<double>::infinity();
  std::vector<bool> seen(static_cast<std::size_t>(grid.size()), false);
  std::function<void(CellCoord, double)> go = [&](CellCoord c, double cost) {
    if (c == s.dest_cell()) {
      best = std::min(best, cost);
      return;
    }
    for (Direction d : kAllDirections) {
      const auto n = grid.adjacent(c, d);
      if (!n || seen[static_cast<std::size_t>(grid.index_of(*n))]) continue;
      const auto p = min_power_meeting_threshold(s, *n, thr);
      if (!p) continue;
      seen[static_cast<std::size_t>(grid.index_of(*n))] = true;
      go(*n, cost + entry_cost(s, cfg, *n, *p));
      seen[static_cast<std::size_t>(grid.index_of(*n))] = false;
    }
  };
  seen[static_cast<std::size_t>(grid.index_of(s.source_cell()))] = true;
  go(s.source_cell(), 0.0);
  return best;
}

int turns_of(const std::vector<Direction>& p) {
  int t = 0;
  for (std::size_t i = 1; i < p.size(); ++i) t += p[i] != p[i - 1];
  return t;
}

// Every distance-reducing path, then pick (turns, lexicographic) minimum.
std::vector<Direction> exhaustive_min_turn(const Scenario& s, CellCoord start) {
  std::vector<std::vector<Direction>> all;
  std::vector<Direction> cur;
  std::function<void(CellCoord)> go = [&](CellCoord c) {
    if (c == s.dest_cell()) {
      all.push_back(cur);
      return;
    }
    for (Direction d : kAllDirections) {
      const auto n = s.grid().adjacent(c, d);
      if (!n || hex_distance(*n, s.dest_cell()) != hex_distance(c, s.dest_cell()) - 1) continue;
      cur.push_back(d);
      go(*n);
      cur.pop_back();
    }
  };
  go(start);
  return *std::min_element(all.begin(), all.end(), [](const auto& a, const auto& b) {
    if (turns_of(a) != turns_of(b)) return turns_of(a) < turns_of(b);
    return a < b;
  });
}

}  // namespace

TEST_CASE("gini impurity") {
  const std::vector<int> pure{3, 3, 3}, half{1, 2, 1, 2}, thirds{1, 2, 3};
  CHECK(gini(pure) == 0.0);
  CHECK(gini(half) == doctest::Approx(0.5));
  CHECK(gini(thirds) == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("tree on a pure set is a single leaf") {
  const std::vector<LabeledState> d{ls({0.1, 0, 0, 0, 0}, 7), ls({0.9, 0.3, 1, 0, 0}, 7)};
  const auto t = fit_tree(d);
  CHECK(t.num_leaves() == 1);
  CHECK(t.depth() == 0);
  CHECK(predict_class(t, {0.5, 0.5, 0.5, 0.5, 0.5}) == 7);
  CHECK(predict(t, {0, 0, 0, 0, 0}) == Action::from_joint(7));
}

TEST_CASE("one-dimensional split lands on the brute-force midpoint") {
  Rng rng(12);
  for (int trial = 0; trial < 30; ++trial) {
    // Labels separable on feature 2 at a random boundary, noise elsewhere.
    const double boundary = rng.uniform(0.2, 0.8);
    std::vector<LabeledState> d;
    for (int i = 0; i < 20; ++i) {
      FeatureVector f{};
      f[2] = rng.uniform01();
      d.push_back(ls(f, f[2] <= boundary ? 4 : 9));
    }
    std::vector<double> lo, hi;
    for (const auto& s : d) (s.action == 4 ? lo : hi).push_back(s.features[2]);
    if (lo.empty() || hi.empty()) continue;
    const double mid = (*std::max_element(lo.begin(), lo.end()) + *std::min_element(hi.begin(), hi.end())) / 2;
    const auto t = fit_tree(d);
    REQUIRE(t.num_leaves() == 2);
    const auto& root = t.nodes[static_cast<std::size_t>(t.root)];
    CHECK(root.feature == 2);
    CHECK(root.threshold == doctest::Approx(mid).epsilon(1e-12));
    CHECK(evaluate_bc(t, d) == 1.0);
  }
}

TEST_CASE("tree memorizes distinct points") {
  Rng rng(4);
  std::vector<LabeledState> d;
  for (int i = 0; i < 60; ++i) {
    FeatureVector f{};
    for (double& v : f) v = rng.uniform01();
    d.push_back(ls(f, static_cast<int>(rng.below(kNumActions))));
  }
  const auto t = fit_tree(d);
  CHECK(evaluate_bc(t, d) == 1.0);
  CHECK_THROWS_AS(evaluate_bc(t, std::vector<LabeledState>{}), ContractError);
}

TEST_CASE("expert imitation: training accuracy never below held-out") {
  const auto data = to_labeled_states(scen(), scripted_expert(scen(), {}, 10));
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const auto split = train_test_split(data, 0.8, seed);
    CHECK(split.test.size() == static_cast<std::size_t>(std::lround(0.2 * data.size())));
    CHECK(split.train.size() + split.test.size() == data.size());
    const auto t = fit_tree(split.train);
    CHECK(evaluate_bc(t, split.train) == 1.0);
    CHECK(evaluate_bc(t, split.train) >= evaluate_bc(t, split.test));
  }
  const auto a = train_test_split(data, 0.8, 3), b = train_test_split(data, 0.8, 3);
  CHECK(fit_tree(a.train) == fit_tree(b.train));
}

TEST_CASE("tree JSON round trip") {
  const auto data = to_labeled_states(scen(), scripted_expert(scen(), {}, 4));
  const auto t = fit_tree(data);
  std::string sid;
  CHECK(tree_from_json(tree_to_json(t, "abc"), &sid) == t);
  CHECK(sid == "abc");
  CHECK_THROWS_AS(
      tree_from_json(R"({"kind":"tree","root":0,"nodes":[{"kind":"split","class":0,"feature":0,"threshold":"0.5","left":5,"right":6}]})"),
      CorruptRecordError);
}

TEST_CASE("scripted expert meets the throughput threshold on every step") {
  const auto trajs = scripted_expert(scen(), {}, 3);
  REQUIRE(trajs.size() == 3);
  CHECK(trajs[0] == trajs[2]);
  for (const auto& t : trajs) {
    validate_trajectory(scen(), t);
    CHECK(t.steps.back().cell == scen().dest_cell());
    for (const auto& s : t.steps) CHECK(s.throughput_bps >= scen().config().throughput_threshold_bps);
  }
  ExpertOracleConfig strict;
  strict.throughput_threshold_bps = 1e12;
  CHECK_THROWS_AS(plan_expert_route(scen(), strict, scen().source_cell()), ConfigError);
  ExpertOracleConfig bad;
  bad.hop_weight = -1;
  CHECK_THROWS_AS(plan_expert_route(scen(), bad, scen().source_cell()), ConfigError);
}

TEST_CASE("expert route matches exhaustive search on small grids") {
  for (std::uint64_t seed = 1; seed <= 12; ++seed) {
    const int cols = 2 + static_cast<int>(seed % 3), rows = 2 + static_cast<int>((seed / 3) % 3);
    const auto s = small_grid(cols, rows, seed);
    for (const auto& cfg : {ExpertOracleConfig{}, ExpertOracleConfig{1.0, 0.0, -1.0}, ExpertOracleConfig{0.2, 1.0, -1.0}}) {
      const auto plan = plan_expert_route(s, cfg, s.source_cell());
      CHECK(plan.cost == doctest::Approx(brute_force_cost(s, cfg)).epsilon(1e-12));
      CHECK(plan.cells.front() == s.source_cell());
      CHECK(plan.cells.back() == s.dest_cell());
      CHECK(plan.actions.size() + 1 == plan.cells.size());
    }
  }
}

TEST_CASE("with no users the expert takes a shortest route") {
  ScenarioConfig c;
  c.ue_count_per_cell.assign(25, 0);
  const auto s = Scenario::build(c, 1);
  const auto plan = plan_expert_route(s, {}, s.source_cell());
  CHECK(static_cast<int>(plan.actions.size()) == hex_distance(s.source_cell(), s.dest_cell()));
}

TEST_CASE("expert cost is no worse than the shortest path at matching power") {
  const ExpertOracleConfig cfg;
  const auto plan = plan_expert_route(scen(), cfg, scen().source_cell());
  const auto path = min_turn_shortest_path(scen(), scen().source_cell());
  double cost = 0;
  CellCoord c = scen().source_cell();
  for (Direction d : path) {
    c = *scen().grid().adjacent(c, d);
    cost += entry_cost(scen(), cfg, c, *min_power_meeting_threshold(scen(), c, scen().config().throughput_threshold_bps));
  }
  CHECK(plan.cost <= cost + 1e-12);
}

TEST_CASE("expert policy follows the plan and replans from detours") {
  ExpertPolicy p({});
  const auto plan = plan_expert_route(scen(), {}, scen().source_cell());
  const auto t = rollout(scen(), p, scen().source_cell(), 0, {TrajectorySourceKind::Policy, "expert"});
  REQUIRE(t.steps.size() == plan.actions.size());
  for (std::size_t i = 0; i < t.steps.size(); ++i) CHECK(t.steps[i].action == plan.actions[i]);
  const CellCoord elsewhere = offset_to_axial({2, 0});
  const auto t2 = rollout(scen(), p, elsewhere, 0, {TrajectorySourceKind::Policy, "expert"});
  CHECK(t2.steps.back().cell == scen().dest_cell());
}

TEST_CASE("minimum-turn shortest path") {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    const auto s = small_grid(3 + static_cast<int>(seed % 3), 3 + static_cast<int>(seed / 3), seed);
    for (int i = 0; i < s.num_cells(); ++i) {
      const CellCoord start = s.grid().cell_at(i);
      const auto path = min_turn_shortest_path(s, start);
      CHECK(static_cast<int>(path.size()) == hex_distance(start, s.dest_cell()));
      CHECK(path == exhaustive_min_turn(s, start));
      std::set<int> visited{i};
      CellCoord c = start;
      for (Direction d : path) {
        c = *s.grid().adjacent(c, d);
        CHECK(visited.insert(s.grid().index_of(c)).second);
      }
      CHECK(c == s.dest_cell());
    }
  }
  const auto p = min_turn_shortest_path(scen(), scen().source_cell());
  CHECK(p.size() == 6);
  CHECK(turns_of(p) == 1);
  CHECK(p == exhaustive_min_turn(scen(), scen().source_cell()));
}

TEST_CASE("shortest-path policy: seeds change only the power") {
  const auto dirs = min_turn_shortest_path(scen(), scen().source_cell());
  std::set<std::vector<int>> powers;
  for (std::uint64_t seed = 0; seed < 8; ++seed) {
    ShortestPathPolicy p(seed);
    const auto t = rollout(scen(), p, scen().source_cell(), 0, {TrajectorySourceKind::Policy, "shortest"});
    REQUIRE(t.steps.size() == dirs.size());
    std::vector<int> pw;
    for (std::size_t i = 0; i < dirs.size(); ++i) {
      const Action a = Action::from_joint(t.steps[i].action);
      CHECK(a.move_dir == dirs[i]);
      pw.push_back(a.power_idx);
    }
    powers.insert(pw);
    CHECK(t.steps.back().cell == scen().dest_cell());
    ShortestPathPolicy again(seed);
    CHECK(rollout(scen(), again, scen().source_cell(), 0, {TrajectorySourceKind::Policy, "shortest"}) == t);
  }
  CHECK(powers.size() > 1);
}

TEST_CASE("random policy is uniform over joint actions") {
  RandomPolicy p(77);
  p.begin_episode(scen(), 0);
  std::array<int, kNumActions> hist{};
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++hist[static_cast<std::size_t>(p.act({}).joint_index())];
  const double expected = static_cast<double>(n) / kNumActions;
  double chi2 = 0;
  for (int h : hist) chi2 += (h - expected) * (h - expected) / expected;
  CHECK(chi2 < 66.6);  // 35 dof, p = 0.001

  RandomPolicy a(5), b(5);
  const auto ta = rollout(scen(), a, scen().source_cell(), 3, {TrajectorySourceKind::Policy, "random"});
  const auto tb = rollout(scen(), b, scen().source_cell(), 3, {TrajectorySourceKind::Policy, "random"});
  CHECK(ta == tb);
}

TEST_CASE("separable example and adversarial held-out set") {
  std::vector<LabeledState> d;
  for (double x : {0.05, 0.2, 0.35, 0.45, 0.55, 0.7, 0.9}) d.push_back(ls({x, 0.3, 0, 0.5, 0.1}, x < 0.5 ? 2 : 7));
  const auto t = fit_tree(d);
  CHECK(t.nodes[static_cast<std::size_t>(t.root)].threshold == doctest::Approx(0.5));
  CHECK(predict_class(t, {0.2, 0, 0, 0, 0}) == 2);
  CHECK(predict_class(t, {0.8, 0, 0, 0, 0}) == 7);
  std::vector<LabeledState> wrong;
  for (const auto& s : d) wrong.push_back(ls(s.features, s.action == 2 ? 11 : 12));
  CHECK(evaluate_bc(t, wrong) == 0.0);
  // Majority ties go to the lowest class.
  const std::vector<LabeledState> tie{ls({0.3, 0, 0, 0, 0}, 9), ls({0.3, 0, 0, 0, 0}, 4)};
  CHECK(predict_class(fit_tree(tie), {0.3, 0, 0, 0, 0}) == 4);
}

TEST_CASE("expert route keeps clear of the dense district") {
  const auto plan = plan_expert_route(scen(), {}, scen().source_cell());
  for (const auto& c : plan.cells) CHECK(scen().ue_count(scen().grid().index_of(c)) < 5);
  CHECK(static_cast<int>(plan.actions.size()) == hex_distance(scen().source_cell(), scen().dest_cell()));
}
