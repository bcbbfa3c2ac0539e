#include "uavirl/dqn.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "uavirl/errors.hpp"

namespace uavirl::dqn {

using detail::format_double;
using detail::ojson;
using detail::parse_double;
using detail::require;

ReplayBuffer::ReplayBuffer(std::size_t capacity) : data_(capacity) {
  if (capacity == 0) throw ConfigError("replay buffer capacity must be > 0");
}

void ReplayBuffer::push(const Transition& t) {
  data_[head_] = t;
  head_ = (head_ + 1) % data_.size();
  size_ = std::min(size_ + 1, data_.size());
}

const Transition& ReplayBuffer::at(std::size_t i) const {
  if (i >= size_) throw ContractError("replay index out of range");
  const std::size_t oldest = (head_ + data_.size() - size_) % data_.size();
  return data_[(oldest + i) % data_.size()];
}

std::vector<std::size_t> ReplayBuffer::sample_indices(std::size_t n, Rng& rng) const {
  n = std::min(n, size_);
  std::vector<std::size_t> out;
  out.reserve(n);
  // Floyd's algorithm: n distinct draws from [0, size).
  for (std::size_t j = size_ - n; j < size_; ++j) {
    const std::size_t t = static_cast<std::size_t>(rng.below(j + 1));
    if (std::find(out.begin(), out.end(), t) == out.end()) out.push_back(t);
    else out.push_back(j);
  }
  return out;
}

void DqnConfig::validate() const {
  if (num_eps < 0) throw ConfigError("dqn: num_eps must be >= 0");
  if (batch_size < 1) throw ConfigError("dqn: batch_size must be >= 1");
  if (replay_capacity < 1) throw ConfigError("dqn: replay_capacity must be >= 1");
  if (!(learning_rate > 0.0)) throw ConfigError("dqn: learning_rate must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("dqn: gamma must lie in (0, 1]");
  if (!(eps_floor > 0.0 && eps_floor < 1.0)) throw ConfigError("dqn: eps_floor must lie in (0, 1)");
}

Action greedy_action_dqn(const MlpParams& params, const FeatureVector& phi) {
  const QValues q = mlp_forward(params, phi);
  // max_element returns the first maximum, i.e. the lowest index on ties.
  return Action::from_joint(static_cast<int>(std::max_element(q.begin(), q.end()) - q.begin()));
}

MlpParams train(const Scenario& scenario, const RewardWeights& weights, const DqnConfig& config, std::uint64_t seed,
                DqnStats* stats) {
  config.validate();
  Rng init_rng(derive_seed(seed, "dqn-init"));
  Rng rng(derive_seed(seed, "dqn-train"));
  MlpParams params = MlpParams::glorot(init_rng);
  AdamState adam = AdamState::for_params(params);
  ReplayBuffer replay(config.replay_capacity);

  std::vector<Sample> batch;
  std::vector<double> targets;
  const double warmup = config.num_eps / 10.0;

  for (int episode = 0; episode < config.num_eps; ++episode) {
    const double eps = lfa::epsilon_schedule(episode, config.num_eps, config.eps_floor);
    UavState state = world::reset(scenario);
    FeatureVector phi = world::initial_features(scenario, state);
    double total = 0.0;
    int length = 0;
    while (!state.done) {
      const Action a = rng.uniform01() < eps ? Action::from_joint(static_cast<int>(rng.below(kNumActions)))
                                             : greedy_action_dqn(params, phi);
      const StepResult r = world::step(scenario, state, a);
      const double rew = reward(weights, r.features);
      replay.push({phi, a.joint_index(), rew, r.features, r.state.done});

      if (episode > warmup) {
        const auto idx = replay.sample_indices(static_cast<std::size_t>(config.batch_size), rng);
        batch.clear();
        targets.clear();
        for (std::size_t i : idx) {
          const Transition& t = replay.at(i);
          double next = 0.0;
          if (!t.done) {
            const QValues qn = mlp_forward(params, t.phi_next);
            next = *std::max_element(qn.begin(), qn.end());
          }
          batch.push_back({t.phi, t.action});
          targets.push_back(lfa::q_target(t.reward, config.gamma, next, t.done));
        }
        double loss = 0.0;
        const MlpParams grads = backward(params, batch, targets, &loss);
        if (!std::isfinite(loss))
          throw NumericError("dqn: non-finite loss at episode " + std::to_string(episode));
        adam_step(params, grads, adam, config.learning_rate);
        if (stats) {
          ++stats->gradient_steps;
          if (stats->record_samples) stats->sampled_indices.insert(stats->sampled_indices.end(), idx.begin(), idx.end());
        }
      }
      total += rew;
      ++length;
      state = r.state;
      phi = r.features;
    }
    if (stats) {
      stats->episode_reward.push_back(total);
      stats->episode_length.push_back(length);
      stats->episode_success.push_back(state.cell == scenario.dest_cell());
    }
  }
  bool finite = true;
  params.for_each([&](double v) { finite = finite && std::isfinite(v); });
  if (!finite) throw NumericError("dqn: non-finite parameters after training");
  return params;
}

std::unique_ptr<Policy> DqnLearner::train(const Scenario& scenario, const RewardWeights& weights, std::uint64_t seed) {
  return std::make_unique<DqnPolicy>(dqn::train(scenario, weights, config_, seed));
}

std::string model_to_json(const MlpParams& params, const std::string& scenario_id, const std::string& weights_hash,
                          const DqnConfig& config) {
  ojson j;
  j["schema_version"] = 1;
  j["kind"] = "dqn";
  j["scenario_id"] = scenario_id;
  j["weights_hash"] = weights_hash;
  j["config"] = {{"num_eps", config.num_eps},
                 {"batch_size", config.batch_size},
                 {"replay_capacity", config.replay_capacity},
                 {"learning_rate", format_double(config.learning_rate)},
                 {"gamma", format_double(config.gamma)},
                 {"eps_floor", format_double(config.eps_floor)}};
  ojson layers = ojson::array();
  for (const auto& l : params.layers) {
    ojson lj;
    lj["in"] = l.in;
    lj["out"] = l.out;
    ojson w = ojson::array();
    for (double v : l.weights) w.push_back(format_double(v));
    ojson b = ojson::array();
    for (double v : l.bias) b.push_back(format_double(v));
    lj["weights"] = w;
    lj["bias"] = b;
    layers.push_back(lj);
  }
  j["layers"] = layers;
  return j.dump(2) + "\n";
}

MlpParams model_from_json(const std::string& text, std::string* scenario_id) {
  try {
    const ojson j = ojson::parse(text);
    if (require(j, "kind").get<std::string>() != "dqn") throw CorruptRecordError("dqn model: wrong kind");
    MlpParams p = MlpParams::zeros();
    const auto& layers = require(j, "layers");
    if (!layers.is_array() || layers.size() != p.layers.size()) throw CorruptRecordError("dqn model: expected 3 layers");
    for (std::size_t li = 0; li < p.layers.size(); ++li) {
      auto& l = p.layers[li];
      const auto& lj = layers[li];
      if (require(lj, "in").get<int>() != l.in || require(lj, "out").get<int>() != l.out)
        throw CorruptRecordError("dqn model: layer shape mismatch");
      const auto& w = require(lj, "weights");
      const auto& b = require(lj, "bias");
      if (w.size() != l.weights.size() || b.size() != l.bias.size())
        throw CorruptRecordError("dqn model: parameter count mismatch");
      for (std::size_t i = 0; i < l.weights.size(); ++i) l.weights[i] = parse_double(w[i], "weights");
      for (std::size_t i = 0; i < l.bias.size(); ++i) l.bias[i] = parse_double(b[i], "bias");
    }
    if (scenario_id) *scenario_id = require(j, "scenario_id").get<std::string>();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("dqn model: ") + e.what());
  }
}

}  // namespace uavirl::dqn
