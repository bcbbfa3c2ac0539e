#include "uavirl/policy.hpp"

#include "uavirl/errors.hpp"

namespace uavirl {

Trajectory rollout(const Scenario& scenario, Policy& policy, CellCoord start, std::uint64_t episode_seed,
                   const TrajectorySource& source) {
  Trajectory traj;
  traj.scenario_id = scenario.id();
  traj.source = source;
  traj.start = start;
  policy.begin_episode(scenario, episode_seed);
  Observation obs{world::initial_features(scenario, world::reset_at(scenario, start)),
                  world::reset_at(scenario, start)};
  if (obs.state.done) throw ConfigError("rollout: start cell is the destination");
  int t = 0;
  while (!obs.state.done) {
    const Action a = policy.act(obs);
    const StepResult r = world::step(scenario, obs.state, a);
    traj.steps.push_back({t++, r.state.cell, a.joint_index(), r.features, r.metrics.throughput_bps,
                          r.metrics.interference_w, r.state.done});
    obs = {r.features, r.state};
  }
  return traj;
}

ReplayPolicy::ReplayPolicy(std::vector<int> actions, std::string label)
    : actions_(std::move(actions)), label_(std::move(label)) {
  if (actions_.empty()) throw ContractError("ReplayPolicy needs at least one action");
}

Action ReplayPolicy::act(const Observation&) {
  const int a = actions_[std::min(next_, actions_.size() - 1)];
  ++next_;
  return Action::from_joint(a);
}

}  // namespace uavirl
