#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uavirl/policy.hpp"
#include "uavirl/rng.hpp"
#include "uavirl/trajectories.hpp"

namespace uavirl::bc {

// Cost weights for the scripted expert. Interference is measured relative to
// the scenario's maximum aggregate interference.
struct ExpertOracleConfig {
  double interference_weight = 1.0;
  double hop_weight = 0.1;
  // Negative means "use the scenario's throughput_threshold_bps".
  double throughput_threshold_bps = -1.0;

  void validate() const;
};

struct ExpertPlan {
  std::vector<CellCoord> cells;  // includes the start cell
  std::vector<int> actions;      // joint action per hop
  double cost = 0.0;
};

// Lowest power level meeting the throughput threshold over this cell, if any.
std::optional<int> min_power_meeting_threshold(const Scenario& scenario, CellCoord cell, double threshold_bps);

// Edge cost of entering `cell` at the given power level.
double entry_cost(const Scenario& scenario, const ExpertOracleConfig& config, CellCoord cell, int power_idx);

// Minimum-cost route by Dijkstra over the cell graph. Throws ConfigError when
// the threshold leaves no feasible route or the route exceeds dist_limit.
ExpertPlan plan_expert_route(const Scenario& scenario, const ExpertOracleConfig& config, CellCoord start);

// n identical demonstrations from the source cell.
std::vector<Trajectory> scripted_expert(const Scenario& scenario, const ExpertOracleConfig& config, int n_trajs);

// Replans the optimal route from whatever cell it finds itself in.
class ExpertPolicy final : public Policy {
 public:
  explicit ExpertPolicy(ExpertOracleConfig config) : config_(config) {}
  std::string name() const override { return "expert"; }
  void begin_episode(const Scenario& scenario, std::uint64_t) override { scenario_ = &scenario; }
  Action act(const Observation& obs) override;

 private:
  ExpertOracleConfig config_;
  const Scenario* scenario_ = nullptr;
};

// Minimum-hop path with the fewest direction changes; remaining ties go to the
// lexicographically smallest direction sequence.
std::vector<Direction> min_turn_shortest_path(const Scenario& scenario, CellCoord start);

// Follows min_turn_shortest_path with a uniformly random power level per step.
class ShortestPathPolicy final : public Policy {
 public:
  explicit ShortestPathPolicy(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string name() const override { return "shortest"; }
  void begin_episode(const Scenario& scenario, std::uint64_t episode_seed) override;
  Action act(const Observation& obs) override;

 private:
  std::uint64_t seed_;
  Rng rng_;
  const Scenario* scenario_ = nullptr;
  std::vector<Direction> plan_;
  std::size_t next_ = 0;
  CellCoord expected_{};
};

// Uniform over the 36 joint actions.
class RandomPolicy final : public Policy {
 public:
  explicit RandomPolicy(std::uint64_t seed) : seed_(seed), rng_(seed) {}
  std::string name() const override { return "random"; }
  void begin_episode(const Scenario&, std::uint64_t episode_seed) override;
  Action act(const Observation&) override { return Action::from_joint(static_cast<int>(rng_.below(kNumActions))); }

 private:
  std::uint64_t seed_;
  Rng rng_;
};

}  // namespace uavirl::bc
