#include "uavirl/trajectories.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "json_util.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/rng.hpp"

namespace uavirl {

using detail::ojson;
using detail::require;

std::string TrajectorySource::to_string() const {
  switch (kind) {
    case TrajectorySourceKind::HumanExpert:
      return "human_expert";
    case TrajectorySourceKind::ScriptedExpert:
      return "scripted_expert";
    case TrajectorySourceKind::Policy:
      return "policy:" + policy_name;
  }
  return "unknown";
}

TrajectorySource TrajectorySource::parse(const std::string& text) {
  if (text == "human_expert") return {TrajectorySourceKind::HumanExpert, {}};
  if (text == "scripted_expert") return {TrajectorySourceKind::ScriptedExpert, {}};
  if (text.rfind("policy:", 0) == 0) return {TrajectorySourceKind::Policy, text.substr(7)};
  throw CorruptRecordError("trajectory: unknown source '" + text + "'");
}

void validate_trajectory(const Scenario& scenario, const Trajectory& traj) {
  if (traj.steps.empty()) throw CorruptRecordError("trajectory: no steps");
  if (traj.scenario_id != scenario.id()) throw ConfigError("trajectory: scenario_id does not match scenario");
  const auto& grid = scenario.grid();
  if (!grid.contains(traj.start)) throw CorruptRecordError("trajectory: start cell off the grid");
  CellCoord prev = traj.start;
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    const StepRecord& s = traj.steps[i];
    if (s.t != static_cast<int>(i)) throw CorruptRecordError("trajectory: step indices are not consecutive from 0");
    if (s.action < 0 || s.action >= kNumActions) throw CorruptRecordError("trajectory: action out of range");
    const Action a = Action::from_joint(s.action);
    if (!(grid.neighbor(prev, a.move_dir) == s.cell))
      throw CorruptRecordError("trajectory: step " + std::to_string(i) + " breaks the neighbor chain");
    const bool last = i + 1 == traj.steps.size();
    if (s.done != last) throw CorruptRecordError("trajectory: exactly the last record must be terminal");
    for (double f : s.features) {
      if (!(f >= 0.0 && f <= 1.0)) throw CorruptRecordError("trajectory: feature outside [0,1]");
    }
    prev = s.cell;
  }
}

FeatureVector discounted_feature_sum(const Trajectory& traj, double gamma) {
  if (!(gamma > 0.0 && gamma <= 1.0)) throw ContractError("discount must lie in (0, 1]");
  if (traj.steps.empty()) throw ContractError("discounted_feature_sum: empty trajectory");
  FeatureVector sum{};
  double discount = 1.0;
  for (const StepRecord& s : traj.steps) {
    for (int k = 0; k < kNumFeatures; ++k) sum[k] += discount * s.features[k];
    discount *= gamma;
  }
  return sum;
}

FeatureVector feature_expectation(const std::vector<Trajectory>& trajs, double gamma) {
  if (trajs.empty()) throw ContractError("feature_expectation: no trajectories");
  FeatureVector mean{};
  for (const Trajectory& t : trajs) {
    if (t.scenario_id != trajs.front().scenario_id)
      throw ConfigError("feature_expectation: trajectories come from different scenarios");
    const FeatureVector s = discounted_feature_sum(t, gamma);
    for (int k = 0; k < kNumFeatures; ++k) mean[k] += s[k];
  }
  for (double& m : mean) m /= static_cast<double>(trajs.size());
  return mean;
}

double feature_drift(const Scenario& scenario, const Trajectory& traj) {
  UavState state = world::reset_at(scenario, traj.start);
  double drift = 0.0;
  for (const StepRecord& s : traj.steps) {
    const StepResult r = world::step(scenario, state, Action::from_joint(s.action));
    for (int k = 0; k < kNumFeatures; ++k) drift = std::max(drift, std::abs(r.features[k] - s.features[k]));
    state = r.state;
  }
  return drift;
}

std::vector<LabeledState> to_labeled_states(const Scenario& scenario, const std::vector<Trajectory>& trajs) {
  std::vector<LabeledState> out;
  for (const Trajectory& traj : trajs) {
    FeatureVector obs = world::initial_features(scenario, world::reset_at(scenario, traj.start));
    for (const StepRecord& s : traj.steps) {
      out.push_back({obs, s.action});
      obs = s.features;
    }
  }
  return out;
}

std::string trajectory_to_jsonl(const Trajectory& traj) {
  std::string out;
  ojson header;
  header["schema_version"] = kTrajectorySchemaVersion;
  header["scenario_id"] = traj.scenario_id;
  header["source"] = traj.source.to_string();
  header["start_q"] = traj.start.q;
  header["start_r"] = traj.start.r;
  out += header.dump() + "\n";
  for (const StepRecord& s : traj.steps) {
    ojson j;
    j["t"] = s.t;
    j["cell_q"] = s.cell.q;
    j["cell_r"] = s.cell.r;
    j["action"] = s.action;
    j["phi"] = s.features;
    j["throughput_bps"] = s.throughput_bps;
    j["interference_w"] = s.interference_w;
    j["done"] = s.done;
    out += j.dump() + "\n";
  }
  return out;
}

Trajectory trajectory_from_jsonl(const std::string& text) {
  if (text.empty() || text.back() != '\n') throw CorruptRecordError("trajectory: truncated file (missing final LF)");
  std::istringstream in(text);
  std::string line;
  Trajectory traj;
  bool have_header = false;
  try {
    while (std::getline(in, line)) {
      const ojson j = ojson::parse(line);
      if (!have_header) {
        if (require(j, "schema_version").get<int>() != kTrajectorySchemaVersion)
          throw CorruptRecordError("trajectory: schema version mismatch");
        traj.scenario_id = require(j, "scenario_id").get<std::string>();
        traj.source = TrajectorySource::parse(require(j, "source").get<std::string>());
        traj.start = {require(j, "start_q").get<int>(), require(j, "start_r").get<int>()};
        have_header = true;
        continue;
      }
      StepRecord s;
      s.t = require(j, "t").get<int>();
      s.cell = {require(j, "cell_q").get<int>(), require(j, "cell_r").get<int>()};
      s.action = require(j, "action").get<int>();
      const auto& phi = require(j, "phi");
      if (!phi.is_array() || phi.size() != kNumFeatures) throw CorruptRecordError("trajectory: phi must have 5 entries");
      for (int k = 0; k < kNumFeatures; ++k) s.features[k] = phi[k].get<double>();
      s.throughput_bps = require(j, "throughput_bps").get<double>();
      s.interference_w = require(j, "interference_w").get<double>();
      s.done = require(j, "done").get<bool>();
      traj.steps.push_back(s);
    }
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("trajectory: ") + e.what());
  }
  if (!have_header) throw CorruptRecordError("trajectory: missing header");
  if (traj.steps.empty()) throw CorruptRecordError("trajectory: no step records");
  if (!traj.steps.back().done) throw CorruptRecordError("trajectory: truncated (last record is not terminal)");
  for (std::size_t i = 0; i < traj.steps.size(); ++i) {
    if (traj.steps[i].t != static_cast<int>(i)) throw CorruptRecordError("trajectory: step indices not consecutive");
  }
  return traj;
}

// ---- store ---------------------------------------------------------------

TrajectoryStore::TrajectoryStore(std::filesystem::path root) : root_(std::move(root)) {
  std::filesystem::create_directories(root_);
}

std::filesystem::path TrajectoryStore::path_of(const std::string& id) const { return root_ / (id + ".jsonl"); }

std::vector<std::string> TrajectoryStore::list() const {
  std::vector<std::string> ids;
  std::ifstream in(root_ / "index.txt");
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) ids.push_back(line);
  }
  return ids;
}

std::string TrajectoryStore::save(const Trajectory& traj) {
  const std::string body = trajectory_to_jsonl(traj);
  const std::size_t seq = list().size() + 1;
  char prefix[16];
  std::snprintf(prefix, sizeof(prefix), "%06zu", seq);
  const std::string id = std::string("traj-") + prefix + "-" + detail::hex64(fnv1a64(body)).substr(0, 8);
  const auto tmp = root_ / (id + ".jsonl.tmp");
  detail::write_file(tmp.string(), body);
  std::filesystem::rename(tmp, path_of(id));
  std::ofstream index(root_ / "index.txt", std::ios::app);
  index << id << "\n";
  return id;
}

Trajectory TrajectoryStore::load(const std::string& id) const {
  if (id.find('/') != std::string::npos || id.find("..") != std::string::npos)
    throw NotFoundError("trajectory id is malformed: " + id);
  const auto p = path_of(id);
  if (!std::filesystem::exists(p)) throw NotFoundError("no trajectory with id " + id);
  return trajectory_from_jsonl(detail::read_file(p.string()));
}

}  // namespace uavirl
