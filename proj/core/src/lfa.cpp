#include "uavirl/lfa.hpp"

#include <algorithm>
#include <cmath>

#include "json_util.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/rng.hpp"

namespace uavirl::lfa {

using detail::format_double;
using detail::ojson;
using detail::parse_double;
using detail::require;

void LfaConfig::validate() const {
  if (num_eps < 0) throw ConfigError("lfa: num_eps must be >= 0");
  if (!(alpha_sgd > 0.0)) throw ConfigError("lfa: alpha_sgd must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ConfigError("lfa: gamma must lie in (0, 1]");
  if (!(eps_floor > 0.0 && eps_floor < 1.0)) throw ConfigError("lfa: eps_floor must lie in (0, 1)");
}

double predict_q(const LfaModel& model, const FeatureVector& phi, int action) {
  const auto& th = model.theta[static_cast<std::size_t>(action)];
  double q = th[0];
  for (int k = 0; k < kNumFeatures; ++k) q += th[k + 1] * phi[k];
  return q;
}

Action greedy_action(const LfaModel& model, const FeatureVector& phi) {
  int best = 0;
  double best_q = predict_q(model, phi, 0);
  for (int a = 1; a < kNumActions; ++a) {
    const double q = predict_q(model, phi, a);
    if (q > best_q) {
      best_q = q;
      best = a;
    }
  }
  return Action::from_joint(best);
}

double q_target(double reward, double gamma, double max_next_q, bool done) {
  return done ? reward : reward + gamma * max_next_q;
}

void sgd_update(LfaModel& model, const FeatureVector& phi, int action, double target, double alpha_sgd) {
  auto& th = model.theta[static_cast<std::size_t>(action)];
  const double step = alpha_sgd * (target - predict_q(model, phi, action));
  th[0] += step;
  for (int k = 0; k < kNumFeatures; ++k) th[k + 1] += step * phi[k];
}

double epsilon_schedule(int episode, int num_eps, double floor) {
  if (num_eps <= 0) return 1.0;
  const double warm = num_eps / 10.0;
  if (episode <= warm) return 1.0;
  return std::max(floor, 1.0 - (episode - warm) / num_eps);
}

namespace {

double max_q(const LfaModel& model, const FeatureVector& phi) {
  double best = predict_q(model, phi, 0);
  for (int a = 1; a < kNumActions; ++a) best = std::max(best, predict_q(model, phi, a));
  return best;
}

}  // namespace

LfaModel train(const Scenario& scenario, const RewardWeights& weights, const LfaConfig& config, std::uint64_t seed,
               TrainingStats* stats) {
  config.validate();
  LfaModel model;
  Rng rng(derive_seed(seed, "lfa-train"));
  for (int episode = 0; episode < config.num_eps; ++episode) {
    const double eps = epsilon_schedule(episode, config.num_eps, config.eps_floor);
    UavState state = world::reset(scenario);
    FeatureVector phi = world::initial_features(scenario, state);
    double total = 0.0;
    int length = 0;
    while (!state.done) {
      const Action a = rng.uniform01() < eps ? Action::from_joint(static_cast<int>(rng.below(kNumActions)))
                                             : greedy_action(model, phi);
      const StepResult r = world::step(scenario, state, a);
      const double rew = reward(weights, r.features);
      const double target = q_target(rew, config.gamma, r.state.done ? 0.0 : max_q(model, r.features), r.state.done);
      sgd_update(model, phi, a.joint_index(), target, config.alpha_sgd);
      for (double v : model.theta[static_cast<std::size_t>(a.joint_index())]) {
        if (!std::isfinite(v))
          throw NumericError("lfa: non-finite weights at episode " + std::to_string(episode) +
                             " (learning rate too large?)");
      }
      total += rew;
      ++length;
      state = r.state;
      phi = r.features;
      if (stats) ++stats->updates;
    }
    if (stats) {
      stats->episode_reward.push_back(total);
      stats->episode_length.push_back(length);
      stats->episode_success.push_back(state.cell == scenario.dest_cell());
    }
  }
  return model;
}

std::unique_ptr<Policy> LfaLearner::train(const Scenario& scenario, const RewardWeights& weights, std::uint64_t seed) {
  return std::make_unique<LfaPolicy>(lfa::train(scenario, weights, config_, seed));
}

std::string model_to_json(const LfaModel& model, const std::string& scenario_id, const std::string& weights_hash,
                          const LfaConfig& config) {
  ojson j;
  j["schema_version"] = 1;
  j["kind"] = "lfa";
  j["scenario_id"] = scenario_id;
  j["weights_hash"] = weights_hash;
  j["config"] = {{"num_eps", config.num_eps},
                 {"alpha_sgd", format_double(config.alpha_sgd)},
                 {"gamma", format_double(config.gamma)},
                 {"eps_floor", format_double(config.eps_floor)}};
  ojson rows = ojson::array();
  for (const auto& th : model.theta) {
    ojson r = ojson::array();
    for (double v : th) r.push_back(format_double(v));
    rows.push_back(r);
  }
  j["theta"] = rows;
  return j.dump(2) + "\n";
}

LfaModel model_from_json(const std::string& text, std::string* scenario_id) {
  try {
    const ojson j = ojson::parse(text);
    if (require(j, "kind").get<std::string>() != "lfa") throw CorruptRecordError("lfa model: wrong kind");
    const auto& rows = require(j, "theta");
    if (!rows.is_array() || rows.size() != kNumActions) throw CorruptRecordError("lfa model: theta must have 36 rows");
    LfaModel m;
    for (int a = 0; a < kNumActions; ++a) {
      if (rows[a].size() != kThetaSize) throw CorruptRecordError("lfa model: theta rows must have 6 entries");
      for (int k = 0; k < kThetaSize; ++k) m.theta[a][k] = parse_double(rows[a][k], "theta");
    }
    if (scenario_id) *scenario_id = require(j, "scenario_id").get<std::string>();
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("lfa model: ") + e.what());
  }
}

}  // namespace uavirl::lfa
