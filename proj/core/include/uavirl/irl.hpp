#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "uavirl/policy.hpp"
#include "uavirl/qp.hpp"
#include "uavirl/trajectories.hpp"

namespace uavirl {

// Linear reward weights over the feature vector.
struct RewardWeights {
  FeatureVector w{};
};

double reward(const RewardWeights& weights, const FeatureVector& phi);
double policy_value(const FeatureVector& w, const FeatureVector& mu);
// Throws ContractError for the zero vector.
RewardWeights normalize_weights(const FeatureVector& w);
// |w.mu_learner - w.mu_expert|
double hyper_distance(const FeatureVector& w, const FeatureVector& mu_learner, const FeatureVector& mu_expert);
double l2_distance(const FeatureVector& a, const FeatureVector& b);

// Forward RL step inside the apprenticeship loop.
class PolicyLearner {
 public:
  virtual ~PolicyLearner() = default;
  virtual std::string kind() const = 0;
  // Trains a greedy policy for the given reward. The seed fixes every random draw.
  virtual std::unique_ptr<Policy> train(const Scenario& scenario, const RewardWeights& weights, std::uint64_t seed) = 0;
};

struct IrlConfig {
  double gamma = 0.99;
  double eps_irl = 0.1;
  int max_iters = 25;
  // Greedy rollouts averaged per learner feature expectation.
  int eval_runs = 25;
  std::uint64_t master_seed = 42;
};

enum class IrlTermination { BelowThreshold, QpInfeasible, MaxIterations };
std::string termination_name(IrlTermination t);

struct IrlIterationLog {
  int iter = 0;
  FeatureVector w{};
  FeatureVector mu{};
  double hyper_distance = 0.0;
  double l2_gap = 0.0;
  double qp_kkt_residual = 0.0;
};

struct IrlResult {
  RewardWeights weights;
  std::unique_ptr<Policy> policy;
  std::vector<IrlIterationLog> log;
  IrlTermination termination = IrlTermination::MaxIterations;
  FeatureVector mu_expert{};
  // Index into `log` of the returned weights/policy.
  int returned_iter = 0;
};

// Called after every completed iteration.
using IrlProgress = std::function<void(const IrlIterationLog&)>;

FeatureVector estimate_feature_expectation(const Scenario& scenario, Policy& policy, int runs, double gamma,
                                           std::uint64_t seed);

// Apprenticeship learning loop: QP -> normalize -> train -> roll out -> distance.
// Stops when the distance drops below eps_irl, when the QP turns infeasible,
// or after max_iters. The last two return the best iteration seen so far.
IrlResult run_irl(const Scenario& scenario, const std::vector<Trajectory>& expert_trajs, PolicyLearner& learner,
                  const IrlConfig& config, const IrlProgress& progress = {});

std::string irl_log_to_json(const std::vector<IrlIterationLog>& log);
std::vector<IrlIterationLog> irl_log_from_json(const std::string& text);

struct WeightsFile {
  RewardWeights weights;
  std::string scenario_id;
  std::string learner;
  double eps_irl = 0.1;
  std::string expert_hash;
  std::string termination;
};
std::string weights_to_json(const WeightsFile& file);
WeightsFile weights_from_json(const std::string& text);

// Content hash of an expert trajectory set (order-sensitive).
std::string trajectory_set_hash(const std::vector<Trajectory>& trajs);

}  // namespace uavirl
