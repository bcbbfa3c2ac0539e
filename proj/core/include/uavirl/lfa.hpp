#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "uavirl/irl.hpp"

namespace uavirl::lfa {

inline constexpr int kThetaSize = kNumFeatures + 1;  // bias + features

// One linear Q model per joint action: Q(s, a) = theta_a . (1, phi).
struct LfaModel {
  std::array<std::array<double, kThetaSize>, kNumActions> theta{};

  friend bool operator==(const LfaModel&, const LfaModel&) = default;
};

struct LfaConfig {
  int num_eps = 2000;
  double alpha_sgd = 0.001;
  double gamma = 0.99;
  double eps_floor = 0.1;

  void validate() const;
};

struct TrainingStats {
  std::vector<double> episode_reward;
  std::vector<int> episode_length;
  std::vector<bool> episode_success;
  long long updates = 0;
};

double predict_q(const LfaModel& model, const FeatureVector& phi, int action);
// Argmax over the 36 actions; ties go to the lowest joint index.
Action greedy_action(const LfaModel& model, const FeatureVector& phi);
double q_target(double reward, double gamma, double max_next_q, bool done);
// theta_a += alpha * (target - theta_a.x) * x with x = (1, phi); other rows untouched.
void sgd_update(LfaModel& model, const FeatureVector& phi, int action, double target, double alpha_sgd);
// 1 for the first tenth of training, then linear decay by 1/num_eps per episode, floored.
double epsilon_schedule(int episode, int num_eps, double floor = 0.1);

// Online epsilon-greedy Q-learning. Throws NumericError if theta stops being finite.
LfaModel train(const Scenario& scenario, const RewardWeights& weights, const LfaConfig& config, std::uint64_t seed,
               TrainingStats* stats = nullptr);

class LfaPolicy final : public Policy {
 public:
  explicit LfaPolicy(LfaModel model) : model_(std::move(model)) {}
  std::string name() const override { return "lfa"; }
  Action act(const Observation& obs) override { return greedy_action(model_, obs.features); }
  const LfaModel& model() const { return model_; }

 private:
  LfaModel model_;
};

class LfaLearner final : public PolicyLearner {
 public:
  explicit LfaLearner(LfaConfig config) : config_(config) {}
  std::string kind() const override { return "lfa"; }
  std::unique_ptr<Policy> train(const Scenario& scenario, const RewardWeights& weights, std::uint64_t seed) override;

 private:
  LfaConfig config_;
};

std::string model_to_json(const LfaModel& model, const std::string& scenario_id, const std::string& weights_hash,
                          const LfaConfig& config);
LfaModel model_from_json(const std::string& text, std::string* scenario_id = nullptr);

}  // namespace uavirl::lfa
