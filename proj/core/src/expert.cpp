#include "uavirl/expert.hpp"

#include <algorithm>
#include <functional>
#include <limits>
#include <queue>

#include "uavirl/errors.hpp"

namespace uavirl::bc {

void ExpertOracleConfig::validate() const {
  if (interference_weight < 0.0 || hop_weight < 0.0) throw ConfigError("expert: weights must be >= 0");
  if (interference_weight == 0.0 && hop_weight == 0.0) throw ConfigError("expert: weights must not both be zero");
}

std::optional<int> min_power_meeting_threshold(const Scenario& scenario, CellCoord cell, double threshold_bps) {
  const int idx = scenario.grid().index_of(cell);
  for (int p = 0; p < kNumPowerLevels; ++p) {
    if (scenario.link(idx, p).throughput_bps >= threshold_bps) return p;
  }
  return std::nullopt;
}

double entry_cost(const Scenario& scenario, const ExpertOracleConfig& config, CellCoord cell, int power_idx) {
  const double imax = scenario.scales().max_interference_w;
  const double interference = scenario.link(scenario.grid().index_of(cell), power_idx).interference_w;
  return config.interference_weight * (imax > 0.0 ? interference / imax : 0.0) + config.hop_weight;
}

ExpertPlan plan_expert_route(const Scenario& scenario, const ExpertOracleConfig& config, CellCoord start) {
  config.validate();
  const auto& grid = scenario.grid();
  const double threshold =
      config.throughput_threshold_bps >= 0.0 ? config.throughput_threshold_bps : scenario.config().throughput_threshold_bps;
  const int n = grid.size();

  std::vector<int> power(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) power[static_cast<std::size_t>(i)] = min_power_meeting_threshold(scenario, grid.cell_at(i), threshold).value_or(-1);

  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(n), kInf);
  std::vector<int> prev(static_cast<std::size_t>(n), -1);
  std::vector<Direction> via(static_cast<std::size_t>(n), Direction::N);
  using Item = std::pair<double, int>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
  const int s = grid.index_of(start);
  dist[static_cast<std::size_t>(s)] = 0.0;
  pq.push({0.0, s});
  while (!pq.empty()) {
    const auto [d, u] = pq.top();
    pq.pop();
    if (d > dist[static_cast<std::size_t>(u)]) continue;
    if (grid.cell_at(u) == scenario.dest_cell()) break;
    for (Direction dir : kAllDirections) {
      const auto nb = grid.adjacent(grid.cell_at(u), dir);
      if (!nb) continue;
      const int v = grid.index_of(*nb);
      if (power[static_cast<std::size_t>(v)] < 0) continue;
      const double nd = d + entry_cost(scenario, config, *nb, power[static_cast<std::size_t>(v)]);
      if (nd < dist[static_cast<std::size_t>(v)]) {
        dist[static_cast<std::size_t>(v)] = nd;
        prev[static_cast<std::size_t>(v)] = u;
        via[static_cast<std::size_t>(v)] = dir;
        pq.push({nd, v});
      }
    }
  }

  const int dst = grid.index_of(scenario.dest_cell());
  if (dist[static_cast<std::size_t>(dst)] == kInf)
    throw ConfigError("expert: throughput threshold is infeasible on every route to the destination");

  ExpertPlan plan;
  plan.cost = dist[static_cast<std::size_t>(dst)];
  std::vector<int> chain;
  for (int v = dst; v != -1; v = prev[static_cast<std::size_t>(v)]) chain.push_back(v);
  std::reverse(chain.begin(), chain.end());
  for (int v : chain) plan.cells.push_back(grid.cell_at(v));
  for (std::size_t i = 1; i < chain.size(); ++i) {
    const int v = chain[i];
    plan.actions.push_back(Action{via[static_cast<std::size_t>(v)], power[static_cast<std::size_t>(v)]}.joint_index());
  }
  if (static_cast<int>(plan.actions.size()) > scenario.dist_limit())
    throw ConfigError("expert: optimal route needs more hops than dist_limit");
  return plan;
}

std::vector<Trajectory> scripted_expert(const Scenario& scenario, const ExpertOracleConfig& config, int n_trajs) {
  if (n_trajs < 1) throw ConfigError("expert: n_trajs must be >= 1");
  const ExpertPlan plan = plan_expert_route(scenario, config, scenario.source_cell());
  ReplayPolicy replay(plan.actions, "expert");
  std::vector<Trajectory> out;
  for (int i = 0; i < n_trajs; ++i) {
    out.push_back(rollout(scenario, replay, scenario.source_cell(), static_cast<std::uint64_t>(i),
                          {TrajectorySourceKind::ScriptedExpert, {}}));
  }
  return out;
}

Action ExpertPolicy::act(const Observation& obs) {
  if (!scenario_) throw ContractError("ExpertPolicy: begin_episode was not called");
  const ExpertPlan plan = plan_expert_route(*scenario_, config_, obs.state.cell);
  if (plan.actions.empty()) throw ContractError("ExpertPolicy: already at the destination");
  return Action::from_joint(plan.actions.front());
}

std::vector<Direction> min_turn_shortest_path(const Scenario& scenario, CellCoord start) {
  const auto& grid = scenario.grid();
  const CellCoord dest = scenario.dest_cell();
  std::vector<Direction> best;
  int best_turns = std::numeric_limits<int>::max();
  std::vector<Direction> cur;
  // Depth-first over moves that reduce the distance by one; directions are
  // tried in enum order so the first optimum found is lexicographically smallest.
  std::function<void(CellCoord, int)> dfs = [&](CellCoord c, int turns) {
    if (turns >= best_turns) return;
    if (c == dest) {
      best = cur;
      best_turns = turns;
      return;
    }
    const int d = hex_distance(c, dest);
    for (Direction dir : kAllDirections) {
      const auto n = grid.adjacent(c, dir);
      if (!n || hex_distance(*n, dest) != d - 1) continue;
      const int t = turns + (!cur.empty() && cur.back() != dir ? 1 : 0);
      cur.push_back(dir);
      dfs(*n, t);
      cur.pop_back();
    }
  };
  dfs(start, 0);
  return best;
}

void ShortestPathPolicy::begin_episode(const Scenario& scenario, std::uint64_t episode_seed) {
  scenario_ = &scenario;
  rng_ = Rng(derive_seed(seed_, "shortest-power", episode_seed));
  plan_.clear();
  next_ = 0;
}

Action ShortestPathPolicy::act(const Observation& obs) {
  if (!scenario_) throw ContractError("ShortestPathPolicy: begin_episode was not called");
  if (plan_.empty() || next_ >= plan_.size() || !(obs.state.cell == expected_)) {
    plan_ = min_turn_shortest_path(*scenario_, obs.state.cell);
    next_ = 0;
    if (plan_.empty()) throw ContractError("ShortestPathPolicy: already at the destination");
  }
  const Direction dir = plan_[next_++];
  expected_ = scenario_->grid().neighbor(obs.state.cell, dir);
  return {dir, static_cast<int>(rng_.below(kNumPowerLevels))};
}

void RandomPolicy::begin_episode(const Scenario&, std::uint64_t episode_seed) {
  rng_ = Rng(derive_seed(seed_, "random-policy", episode_seed));
}

}  // namespace uavirl::bc
