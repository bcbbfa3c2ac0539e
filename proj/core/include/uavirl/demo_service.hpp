#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "uavirl/scenario.hpp"

namespace uavirl::demo {

inline constexpr int kSchemaVersion = 1;

// Session store for human demonstrations and policy playback. Every method
// returns a JSON document carrying schema_version and throws NotFoundError,
// ConflictError or ConfigError (bad input) on failure.
//
// Calls on one session are serialized; distinct sessions run concurrently.
class DemoService {
 public:
  // Finalized demonstrations are saved to a TrajectoryStore at `trajectory_root`.
  explicit DemoService(std::filesystem::path trajectory_root, std::uint64_t seed = 1);
  ~DemoService();
  DemoService(const DemoService&) = delete;
  DemoService& operator=(const DemoService&) = delete;

  // Returns the scenario id.
  std::string add_scenario(const Scenario& scenario);
  // Registers a policy artifact (policy.json text). Validated immediately.
  void add_policy(const std::string& policy_id, const std::string& artifact_json);

  std::string create_session(const std::string& scenario_id);
  std::string get_session(const std::string& session_id) const;
  // move_dir accepts 0..5 or a direction name; body is {"move_dir": ..., "power_idx": ...}.
  std::string step_session(const std::string& session_id, const std::string& request_body);
  std::string step_session(const std::string& session_id, int move_dir, int power_idx);
  std::string finalize_session(const std::string& session_id);

  std::string get_scenario(const std::string& scenario_id) const;
  std::string list_policies() const;
  // Empty scenario_id means the scenario the policy was trained on.
  std::string rollout_policy(const std::string& policy_id, const std::string& scenario_id = {},
                             std::uint64_t seed = 42) const;

  const std::filesystem::path& trajectory_root() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

// Minimal HTTP+JSON front end over DemoService.
class DemoHttpServer {
 public:
  explicit DemoHttpServer(DemoService& service);
  ~DemoHttpServer();
  DemoHttpServer(const DemoHttpServer&) = delete;
  DemoHttpServer& operator=(const DemoHttpServer&) = delete;

  // Returns the bound port; port 0 picks a free one. Throws ConfigError on failure.
  int bind(const std::string& host, int port);
  // Blocks until stop() is called.
  void listen();
  void stop();
  bool running() const;

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace uavirl::demo
