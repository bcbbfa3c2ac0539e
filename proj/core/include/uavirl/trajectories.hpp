#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "uavirl/world.hpp"

namespace uavirl {

inline constexpr int kTrajectorySchemaVersion = 1;

struct StepRecord {
  int t = 0;
  CellCoord cell;  // post-step cell
  int action = 0;  // joint action index 0..35
  FeatureVector features{};  // post-step features
  double throughput_bps = 0.0;
  double interference_w = 0.0;
  bool done = false;

  friend bool operator==(const StepRecord&, const StepRecord&) = default;
};

enum class TrajectorySourceKind { HumanExpert, ScriptedExpert, Policy };

struct TrajectorySource {
  TrajectorySourceKind kind = TrajectorySourceKind::ScriptedExpert;
  std::string policy_name;  // only for Policy

  std::string to_string() const;
  static TrajectorySource parse(const std::string& text);

  friend bool operator==(const TrajectorySource&, const TrajectorySource&) = default;
};

struct Trajectory {
  std::string scenario_id;
  TrajectorySource source;
  CellCoord start;
  std::vector<StepRecord> steps;

  friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

// Checks consecutive t, single terminal record, and that cells form a
// neighbor-or-clamp chain from the start cell consistent with the actions.
void validate_trajectory(const Scenario& scenario, const Trajectory& traj);

// sum_t gamma^t phi(s_t) over post-step features.
FeatureVector discounted_feature_sum(const Trajectory& traj, double gamma);

// Mean of discounted sums. All trajectories must share a scenario_id.
FeatureVector feature_expectation(const std::vector<Trajectory>& trajs, double gamma);

// Recomputes every step from the recorded actions and returns the largest
// absolute feature deviation from what was stored.
double feature_drift(const Scenario& scenario, const Trajectory& traj);

// (pre-step observation, joint action) pairs for supervised imitation.
struct LabeledState {
  FeatureVector features{};
  int action = 0;
};
std::vector<LabeledState> to_labeled_states(const Scenario& scenario, const std::vector<Trajectory>& trajs);

// One header line followed by one StepRecord per line, LF-terminated.
std::string trajectory_to_jsonl(const Trajectory& traj);
Trajectory trajectory_from_jsonl(const std::string& text);

// Directory of trajectory files plus an insertion-ordered index.
class TrajectoryStore {
 public:
  explicit TrajectoryStore(std::filesystem::path root);

  // Writes atomically (temp file + rename) and returns the new id.
  std::string save(const Trajectory& traj);
  Trajectory load(const std::string& id) const;
  std::vector<std::string> list() const;
  std::filesystem::path path_of(const std::string& id) const;

 private:
  std::filesystem::path root_;
};

}  // namespace uavirl
