#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "uavirl/irl.hpp"
#include "uavirl/lfa.hpp"
#include "uavirl/mlp.hpp"

namespace uavirl::dqn {

struct Transition {
  FeatureVector phi{};
  int action = 0;
  double reward = 0.0;
  FeatureVector phi_next{};
  bool done = false;

  friend bool operator==(const Transition&, const Transition&) = default;
};

// Fixed-capacity FIFO replay memory.
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);

  void push(const Transition& t);
  std::size_t size() const { return size_; }
  std::size_t capacity() const { return data_.size(); }
  // i = 0 is the oldest retained entry.
  const Transition& at(std::size_t i) const;
  // Distinct indices (uniform, without replacement); min(n, size()) of them.
  std::vector<std::size_t> sample_indices(std::size_t n, Rng& rng) const;

 private:
  std::vector<Transition> data_;
  std::size_t head_ = 0;  // next write slot
  std::size_t size_ = 0;
};

struct DqnConfig {
  int num_eps = 2000;
  int batch_size = 24;
  std::size_t replay_capacity = 10000;
  double learning_rate = 0.001;
  double gamma = 0.99;
  double eps_floor = 0.1;

  void validate() const;
};

struct DqnStats {
  std::vector<double> episode_reward;
  std::vector<int> episode_length;
  std::vector<bool> episode_success;
  long long gradient_steps = 0;
  std::vector<std::size_t> sampled_indices;  // filled only when record_samples is set
  bool record_samples = false;
};

Action greedy_action_dqn(const MlpParams& params, const FeatureVector& phi);

// Epsilon-greedy DQN with replay, one Adam step per environment step after
// the first tenth of episodes. Throws NumericError when the loss goes non-finite.
MlpParams train(const Scenario& scenario, const RewardWeights& weights, const DqnConfig& config, std::uint64_t seed,
                DqnStats* stats = nullptr);

class DqnPolicy final : public Policy {
 public:
  explicit DqnPolicy(MlpParams params) : params_(std::move(params)) {}
  std::string name() const override { return "dqn"; }
  Action act(const Observation& obs) override { return greedy_action_dqn(params_, obs.features); }
  const MlpParams& params() const { return params_; }

 private:
  MlpParams params_;
};

class DqnLearner final : public PolicyLearner {
 public:
  explicit DqnLearner(DqnConfig config) : config_(config) {}
  std::string kind() const override { return "dqn"; }
  std::unique_ptr<Policy> train(const Scenario& scenario, const RewardWeights& weights, std::uint64_t seed) override;

 private:
  DqnConfig config_;
};

std::string model_to_json(const MlpParams& params, const std::string& scenario_id, const std::string& weights_hash,
                          const DqnConfig& config);
MlpParams model_from_json(const std::string& text, std::string* scenario_id = nullptr);

}  // namespace uavirl::dqn
