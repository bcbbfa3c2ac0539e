#pragma once

#include <cstdint>
#include <memory>
#include <string>

#include "uavirl/trajectories.hpp"
#include "uavirl/world.hpp"

namespace uavirl {

struct Observation {
  FeatureVector features{};
  UavState state;
};

// Decision rule used for rollouts. Stochastic policies reseed in begin_episode.
class Policy {
 public:
  virtual ~Policy() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode(const Scenario& /*scenario*/, std::uint64_t /*episode_seed*/) {}
  virtual Action act(const Observation& obs) = 0;
};

// Runs one episode from `start` until the state is done.
Trajectory rollout(const Scenario& scenario, Policy& policy, CellCoord start, std::uint64_t episode_seed,
                   const TrajectorySource& source);

// Replays a fixed joint-action sequence (repeating the last action if it runs out).
class ReplayPolicy final : public Policy {
 public:
  explicit ReplayPolicy(std::vector<int> actions, std::string label = "replay");
  std::string name() const override { return label_; }
  void begin_episode(const Scenario&, std::uint64_t) override { next_ = 0; }
  Action act(const Observation& obs) override;

 private:
  std::vector<int> actions_;
  std::string label_;
  std::size_t next_ = 0;
};

}  // namespace uavirl
