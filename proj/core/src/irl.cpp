#include "uavirl/irl.hpp"

#include <cmath>
#include <limits>

#include "json_util.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/rng.hpp"

namespace uavirl {

using detail::format_double;
using detail::ojson;
using detail::parse_double;
using detail::require;

double reward(const RewardWeights& weights, const FeatureVector& phi) { return policy_value(weights.w, phi); }

double policy_value(const FeatureVector& w, const FeatureVector& mu) {
  double s = 0.0;
  for (int k = 0; k < kNumFeatures; ++k) s += w[k] * mu[k];
  return s;
}

RewardWeights normalize_weights(const FeatureVector& w) {
  double sq = 0.0;
  for (double v : w) sq += v * v;
  if (!(sq > 0.0)) throw ContractError("normalize_weights: zero vector");
  const double norm = std::sqrt(sq);
  RewardWeights out;
  for (int k = 0; k < kNumFeatures; ++k) out.w[k] = w[k] / norm;
  return out;
}

double hyper_distance(const FeatureVector& w, const FeatureVector& mu_learner, const FeatureVector& mu_expert) {
  return std::abs(policy_value(w, mu_learner) - policy_value(w, mu_expert));
}

double l2_distance(const FeatureVector& a, const FeatureVector& b) {
  double sq = 0.0;
  for (int k = 0; k < kNumFeatures; ++k) sq += (a[k] - b[k]) * (a[k] - b[k]);
  return std::sqrt(sq);
}

std::string termination_name(IrlTermination t) {
  switch (t) {
    case IrlTermination::BelowThreshold:
      return "below_threshold";
    case IrlTermination::QpInfeasible:
      return "qp_infeasible";
    case IrlTermination::MaxIterations:
      return "max_iterations";
  }
  return "unknown";
}

FeatureVector estimate_feature_expectation(const Scenario& scenario, Policy& policy, int runs, double gamma,
                                           std::uint64_t seed) {
  if (runs < 1) throw ConfigError("eval_runs must be >= 1");
  std::vector<Trajectory> trajs;
  trajs.reserve(static_cast<std::size_t>(runs));
  for (int i = 0; i < runs; ++i) {
    trajs.push_back(rollout(scenario, policy, scenario.source_cell(), derive_seed(seed, "mu-rollout", i),
                            {TrajectorySourceKind::Policy, policy.name()}));
  }
  return feature_expectation(trajs, gamma);
}

IrlResult run_irl(const Scenario& scenario, const std::vector<Trajectory>& expert_trajs, PolicyLearner& learner,
                  const IrlConfig& config, const IrlProgress& progress) {
  if (!(config.eps_irl > 0.0)) throw ConfigError("eps_irl must be > 0");
  if (config.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (expert_trajs.empty()) throw ConfigError("run_irl: no expert trajectories");
  for (const Trajectory& t : expert_trajs) validate_trajectory(scenario, t);

  IrlResult result;
  result.mu_expert = feature_expectation(expert_trajs, config.gamma);

  // Random stand-in for the first learner.
  std::vector<FeatureVector> learner_mus;
  {
    Rng rng(derive_seed(config.master_seed, "irl-initial-mu"));
    FeatureVector mu{};
    const double hi = 1.0 / (1.0 - config.gamma);
    for (double& v : mu) v = rng.uniform(0.0, hi);
    learner_mus.push_back(mu);
  }

  std::unique_ptr<Policy> best_policy;
  double best_distance = std::numeric_limits<double>::infinity();
  RewardWeights best_weights;
  int best_iter = -1;

  for (int iter = 0; iter < config.max_iters; ++iter) {
    const QpSolution qp = solve_min_norm_svm(result.mu_expert, learner_mus);
    if (qp.status == QpStatus::Infeasible) {
      result.termination = IrlTermination::QpInfeasible;
      break;
    }
    const RewardWeights w = normalize_weights(qp.w);
    std::unique_ptr<Policy> policy = learner.train(scenario, w, derive_seed(config.master_seed, "irl-train", iter));
    const FeatureVector mu = estimate_feature_expectation(scenario, *policy, config.eval_runs, config.gamma,
                                                          derive_seed(config.master_seed, "irl-eval", iter));
    learner_mus.push_back(mu);

    IrlIterationLog entry;
    entry.iter = iter;
    entry.w = w.w;
    entry.mu = mu;
    entry.hyper_distance = hyper_distance(w.w, mu, result.mu_expert);
    entry.l2_gap = l2_distance(mu, result.mu_expert);
    entry.qp_kkt_residual = qp.kkt_residual;
    result.log.push_back(entry);
    if (progress) progress(entry);

    const bool below = entry.hyper_distance < config.eps_irl;
    if (below || entry.hyper_distance < best_distance) {
      best_distance = entry.hyper_distance;
      best_policy = std::move(policy);
      best_weights = w;
      best_iter = iter;
    }
    if (below) {
      result.termination = IrlTermination::BelowThreshold;
      break;
    }
  }

  if (best_iter < 0) throw NumericError("run_irl: the first QP was infeasible; expert features are degenerate");
  result.weights = best_weights;
  result.policy = std::move(best_policy);
  result.returned_iter = best_iter;
  return result;
}

namespace {

ojson vec_json(const FeatureVector& v) {
  ojson a = ojson::array();
  for (double x : v) a.push_back(format_double(x));
  return a;
}

FeatureVector vec_from(const ojson& j, const char* field) {
  if (!j.is_array() || j.size() != kNumFeatures) throw CorruptRecordError(std::string(field) + " must have 5 entries");
  FeatureVector v{};
  for (int k = 0; k < kNumFeatures; ++k) v[k] = parse_double(j[k], field);
  return v;
}

}  // namespace

std::string irl_log_to_json(const std::vector<IrlIterationLog>& log) {
  ojson arr = ojson::array();
  for (const auto& e : log) {
    ojson j;
    j["iter"] = e.iter;
    j["w"] = vec_json(e.w);
    j["mu"] = vec_json(e.mu);
    j["hyper_distance"] = format_double(e.hyper_distance);
    j["l2_gap"] = format_double(e.l2_gap);
    j["qp_kkt_residual"] = format_double(e.qp_kkt_residual);
    arr.push_back(j);
  }
  return arr.dump(2) + "\n";
}

std::vector<IrlIterationLog> irl_log_from_json(const std::string& text) {
  std::vector<IrlIterationLog> out;
  try {
    for (const auto& j : ojson::parse(text)) {
      IrlIterationLog e;
      e.iter = require(j, "iter").get<int>();
      e.w = vec_from(require(j, "w"), "w");
      e.mu = vec_from(require(j, "mu"), "mu");
      e.hyper_distance = parse_double(require(j, "hyper_distance"), "hyper_distance");
      e.l2_gap = parse_double(require(j, "l2_gap"), "l2_gap");
      if (j.contains("qp_kkt_residual")) e.qp_kkt_residual = parse_double(j.at("qp_kkt_residual"), "qp_kkt_residual");
      out.push_back(e);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("irl log: ") + e.what());
  }
  return out;
}

std::string weights_to_json(const WeightsFile& f) {
  ojson j;
  j["schema_version"] = 1;
  j["w"] = vec_json(f.weights.w);
  j["scenario_id"] = f.scenario_id;
  j["learner"] = f.learner;
  j["eps_irl"] = format_double(f.eps_irl);
  j["expert_hash"] = f.expert_hash;
  j["termination"] = f.termination;
  return j.dump(2) + "\n";
}

WeightsFile weights_from_json(const std::string& text) {
  try {
    const ojson j = ojson::parse(text);
    WeightsFile f;
    f.weights.w = vec_from(require(j, "w"), "w");
    f.scenario_id = require(j, "scenario_id").get<std::string>();
    f.learner = require(j, "learner").get<std::string>();
    f.eps_irl = parse_double(require(j, "eps_irl"), "eps_irl");
    f.expert_hash = require(j, "expert_hash").get<std::string>();
    if (j.contains("termination")) f.termination = j.at("termination").get<std::string>();
    return f;
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("weights file: ") + e.what());
  }
}

std::string trajectory_set_hash(const std::vector<Trajectory>& trajs) {
  // Git-style: hash a length-prefixed header followed by the content.
  std::string content;
  for (const Trajectory& t : trajs) content += trajectory_to_jsonl(t);
  const std::string blob = "blob " + std::to_string(content.size()) + '\0' + content;
  return detail::hex64(fnv1a64(blob));
}

}  // namespace uavirl
