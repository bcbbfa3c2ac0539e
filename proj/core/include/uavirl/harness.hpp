#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "uavirl/irl.hpp"
#include "uavirl/policy.hpp"
#include "uavirl/scenario.hpp"
#include "uavirl/trajectories.hpp"

namespace uavirl::harness {

enum class LearnerKind { IrlLfa, IrlDqn, Bc, Shortest, Random };
std::string learner_kind_name(LearnerKind kind);
LearnerKind parse_learner_kind(const std::string& text);

inline constexpr int kDeskEpisodes = 2000;
inline constexpr int kFullEpisodes = 10000;

struct RunConfig {
  LearnerKind kind = LearnerKind::IrlDqn;
  std::optional<channel::ChannelMode> channel_mode;  // overrides the scenario file
  std::uint64_t master_seed = 42;
  int num_eps = kDeskEpisodes;
  double eps_irl = 0.1;
  int max_iters = 25;
  int eval_runs = 25;
  int expert_trajs = 10;          // scripted demonstrations when no expert store is given
  double bc_train_fraction = 0.8;
  std::optional<CellCoord> start_cell;
  std::filesystem::path out_dir = "out";
  std::filesystem::path expert_dir;  // optional TrajectoryStore with demonstrations

  void validate() const;
};

struct TrainArtifacts {
  std::filesystem::path policy;
  std::filesystem::path weights;  // IRL kinds only
  std::filesystem::path irl_log;  // IRL kinds only
  std::filesystem::path report;
  std::optional<double> bc_accuracy;
  std::optional<IrlTermination> termination;
};

// Applies the config's channel override.
Scenario effective_scenario(const Scenario& base, const RunConfig& config);

// Demonstrations for IRL/BC: the expert store when configured, otherwise
// freshly scripted ones. All must belong to `scenario`.
std::vector<Trajectory> expert_demonstrations(const Scenario& scenario, const RunConfig& config);

// Trains the configured method and writes its artifacts under out_dir.
// Progress lines (including the IRL iteration table) go to `log` when non-null.
TrainArtifacts run_training(const Scenario& base, const RunConfig& config, std::ostream* log = nullptr);

struct LoadedPolicy {
  std::unique_ptr<Policy> policy;
  std::string kind;  // lfa, dqn, tree, shortest, random
  std::string scenario_id;
};
LoadedPolicy load_policy_json(const std::string& text);
LoadedPolicy load_policy(const std::filesystem::path& path);
std::string heuristic_policy_json(const std::string& kind, std::uint64_t seed, const std::string& scenario_id);

struct MetricsRow {
  int index = 0;  // step number, from 1
  double throughput_mean = 0.0;
  double throughput_std = 0.0;
  double interference_mean = 0.0;
  double interference_std = 0.0;
  double distance = 0.0;  // mean hex distance to destination after the step
  double reward = 0.0;    // mean accumulated reward up to this step

  friend bool operator==(const MetricsRow&, const MetricsRow&) = default;
};

struct RunSummary {
  std::vector<CellCoord> path;  // start cell first
  int steps = 0;
  int final_distance = 0;
  bool success = false;
  double total_interference_w = 0.0;
  double mean_throughput_bps = 0.0;
  double total_reward = 0.0;
};

struct EvalReport {
  std::vector<MetricsRow> series;  // truncated at the shortest run
  std::vector<RunSummary> runs;
  double mean_final_distance = 0.0;
  double success_rate = 0.0;
  double mean_steps = 0.0;
  double mean_total_interference_w = 0.0;
};

// Greedy rollouts of `policy`. Rejects artifacts trained on another scenario.
// The reward columns stay zero when no weights are given.
EvalReport evaluate(const Scenario& scenario, Policy& policy, const std::string& artifact_scenario_id, int eval_runs,
                    std::optional<CellCoord> start, std::uint64_t seed, const RewardWeights* weights = nullptr);

// Per-run summary and per-step series built from recorded trajectories.
EvalReport summarize_runs(const Scenario& scenario, const std::vector<Trajectory>& runs, const RewardWeights* weights);

struct UnseenStartEntry {
  std::string label;
  EvalReport report;
  bool reached = false;  // every run reached the destination
};

// Evaluates each labelled artifact from `start` and reports which reach the destination.
std::vector<UnseenStartEntry> unseen_start_eval(const Scenario& scenario, std::vector<std::pair<std::string, LoadedPolicy>>& artifacts,
                                                CellCoord start, int eval_runs, std::uint64_t seed);
std::string format_unseen_report(const Scenario& scenario, const std::vector<UnseenStartEntry>& entries, CellCoord start);

std::string metrics_csv(const std::vector<MetricsRow>& series);
std::vector<MetricsRow> parse_metrics_csv(const std::string& text);
// Throws ContractError on an empty series.
void export_metrics(const std::vector<MetricsRow>& series, const std::filesystem::path& path);

std::string eval_summary_json(const EvalReport& report);

}  // namespace uavirl::harness
