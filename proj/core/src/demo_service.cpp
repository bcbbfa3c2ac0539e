#include "uavirl/demo_service.hpp"

#include <chrono>
#include <map>
#include <mutex>
#include <shared_mutex>

#include "json_util.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/harness.hpp"
#include "uavirl/policy.hpp"
#include "uavirl/rng.hpp"
#include "uavirl/trajectories.hpp"
#include "uavirl/world.hpp"

namespace uavirl::demo {

using detail::ojson;

namespace {

std::int64_t now_ms() {
  return std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::system_clock::now().time_since_epoch())
      .count();
}

ojson cell_json(const Scenario& s, CellCoord c) {
  const OffsetCoord o = axial_to_offset(c);
  return {{"index", s.grid().index_of(c)}, {"q", c.q}, {"r", c.r}, {"col", o.col}, {"row", o.row}};
}

ojson features_json(const FeatureVector& phi) {
  ojson a = ojson::array();
  for (double v : phi) a.push_back(v);
  return a;
}

// Per adjacent cell: UE count and the share of interference landing there.
ojson adjacent_json(const Scenario& s, CellCoord cell, double tx_power_w) {
  ojson arr = ojson::array();
  for (Direction d : kAllDirections) {
    const auto n = s.grid().adjacent(cell, d);
    if (!n) continue;
    ojson j = cell_json(s, *n);
    j["direction"] = std::string(direction_name(d));
    const int idx = s.grid().index_of(*n);
    j["ue_count"] = s.ue_count(idx);
    j["interference_w"] = s.ue_count(idx) * tx_power_w * world::uav_to_bs_gain(s, cell, *n);
    arr.push_back(j);
  }
  return arr;
}

ojson step_view(const Scenario& s, const StepRecord& rec, const UavState& state, const StepMetrics& m) {
  const Action a = Action::from_joint(rec.action);
  const double p = s.power_level(a.power_idx);
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["t"] = rec.t;
  j["action"] = {{"move_dir", static_cast<int>(a.move_dir)},
                 {"move_dir_name", std::string(direction_name(a.move_dir))},
                 {"power_idx", a.power_idx},
                 {"power_w", p},
                 {"joint", rec.action}};
  j["cell"] = cell_json(s, rec.cell);
  j["hops_used"] = state.hops_used;
  j["hops_remaining"] = s.dist_limit() - state.hops_used;
  j["done"] = state.done;
  j["success"] = rec.cell == s.dest_cell();
  j["features"] = features_json(rec.features);
  j["throughput_bps"] = m.throughput_bps;
  j["interference_w"] = m.interference_w;
  j["snr"] = m.snr;
  j["serving_bs"] = m.serving_bs;
  j["hex_dist_to_dest"] = m.hex_dist_to_dest;
  j["adjacent_cells"] = adjacent_json(s, rec.cell, p);
  return j;
}

ojson render_json(const Scenario& s) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["scenario_id"] = s.id();
  j["grid"] = {{"cols", s.grid().cols()}, {"rows", s.grid().rows()}, {"cell_radius_m", s.config().cell_radius_m}};
  ojson cells = ojson::array();
  for (int i = 0; i < s.num_cells(); ++i) {
    const CellCoord c = s.grid().cell_at(i);
    ojson cj = cell_json(s, c);
    const Point2 bs = s.bs_position(i);
    cj["bs"] = {{"x", bs.x}, {"y", bs.y}};
    cj["ue_count"] = s.ue_count(i);
    ojson ues = ojson::array();
    for (const Point2& u : s.ue_placements()[static_cast<std::size_t>(i)]) ues.push_back({{"x", u.x}, {"y", u.y}});
    cj["ues"] = ues;
    ojson nbrs = ojson::object();
    for (Direction d : kAllDirections) {
      const auto n = s.grid().adjacent(c, d);
      nbrs[std::string(direction_name(d))] = n ? ojson(s.grid().index_of(*n)) : ojson(nullptr);
    }
    cj["neighbors"] = nbrs;
    cells.push_back(cj);
  }
  j["cells"] = cells;
  ojson power = ojson::array();
  for (int p = 0; p < kNumPowerLevels; ++p) power.push_back(s.power_level(p));
  j["power_levels_w"] = power;
  ojson dirs = ojson::array();
  for (Direction d : kAllDirections) dirs.push_back(std::string(direction_name(d)));
  j["directions"] = dirs;
  j["dist_limit"] = s.dist_limit();
  j["source"] = cell_json(s, s.source_cell());
  j["destination"] = cell_json(s, s.dest_cell());
  j["channel_mode"] = channel_mode_name(s.channel().channel_mode);
  j["throughput_threshold_bps"] = s.config().throughput_threshold_bps;
  return j;
}

struct Session {
  std::string id;
  std::shared_ptr<const Scenario> scenario;
  UavState state;
  FeatureVector features{};
  Trajectory traj;
  std::vector<ojson> views;
  bool finalized = false;
  std::string trajectory_id;
  std::int64_t created_ms = 0;
  std::int64_t last_active_ms = 0;
  mutable std::mutex mu;
};

ojson session_json(const Session& s) {
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["session_id"] = s.id;
  j["scenario_id"] = s.scenario->id();
  j["cell"] = cell_json(*s.scenario, s.state.cell);
  j["hops_used"] = s.state.hops_used;
  j["hops_remaining"] = s.scenario->dist_limit() - s.state.hops_used;
  j["done"] = s.state.done;
  j["success"] = s.state.cell == s.scenario->dest_cell();
  j["hex_dist_to_dest"] = hex_distance(s.state.cell, s.scenario->dest_cell());
  j["features"] = features_json(s.features);
  j["finalized"] = s.finalized;
  j["trajectory_id"] = s.finalized ? ojson(s.trajectory_id) : ojson(nullptr);
  j["created_ms"] = s.created_ms;
  j["last_active_ms"] = s.last_active_ms;
  j["steps"] = s.views;
  return j;
}

int int_field(const ojson& body, const char* key) {
  if (!body.contains(key)) throw ConfigError(std::string("missing field '") + key + "'");
  const ojson& v = body.at(key);
  if (v.is_number_integer()) return v.get<int>();
  if (std::string(key) == "move_dir" && v.is_string()) {
    const auto d = parse_direction(v.get<std::string>());
    if (!d) throw ConfigError("move_dir: unknown direction '" + v.get<std::string>() + "'");
    return static_cast<int>(*d);
  }
  throw ConfigError(std::string("field '") + key + "' must be an integer");
}

}  // namespace

struct DemoService::Impl {
  std::filesystem::path root;
  TrajectoryStore store;
  std::uint64_t seed;
  mutable std::shared_mutex mu;  // guards the maps, not the sessions
  std::map<std::string, std::shared_ptr<const Scenario>> scenarios;
  std::map<std::string, std::pair<std::string, std::string>> policies;  // id -> (kind, artifact text)
  std::map<std::string, std::string> policy_scenarios;
  std::map<std::string, std::shared_ptr<Session>> sessions;
  std::uint64_t counter = 0;
  std::mutex store_mu;

  Impl(std::filesystem::path r, std::uint64_t s) : root(r), store(r), seed(s) {}

  std::shared_ptr<const Scenario> scenario(const std::string& id) const {
    std::shared_lock lock(mu);
    auto it = scenarios.find(id);
    if (it == scenarios.end()) throw NotFoundError("unknown scenario '" + id + "'");
    return it->second;
  }

  std::shared_ptr<Session> session(const std::string& id) const {
    std::shared_lock lock(mu);
    auto it = sessions.find(id);
    if (it == sessions.end()) throw NotFoundError("unknown session '" + id + "'");
    return it->second;
  }
};

DemoService::DemoService(std::filesystem::path trajectory_root, std::uint64_t seed)
    : impl_(std::make_unique<Impl>(std::move(trajectory_root), seed)) {}

DemoService::~DemoService() = default;

const std::filesystem::path& DemoService::trajectory_root() const { return impl_->root; }

std::string DemoService::add_scenario(const Scenario& scenario) {
  std::unique_lock lock(impl_->mu);
  impl_->scenarios[scenario.id()] = std::make_shared<const Scenario>(scenario);
  return scenario.id();
}

void DemoService::add_policy(const std::string& policy_id, const std::string& artifact_json) {
  if (policy_id.empty()) throw ConfigError("policy id must not be empty");
  harness::LoadedPolicy p = harness::load_policy_json(artifact_json);
  std::unique_lock lock(impl_->mu);
  impl_->policies[policy_id] = {p.kind, artifact_json};
  impl_->policy_scenarios[policy_id] = p.scenario_id;
}

std::string DemoService::create_session(const std::string& scenario_id) {
  auto scen = impl_->scenario(scenario_id);
  auto s = std::make_shared<Session>();
  s->scenario = scen;
  s->state = world::reset(*scen);
  s->features = world::initial_features(*scen, s->state);
  s->traj.scenario_id = scen->id();
  s->traj.source = {TrajectorySourceKind::HumanExpert, {}};
  s->traj.start = s->state.cell;
  s->created_ms = s->last_active_ms = now_ms();
  {
    std::unique_lock lock(impl_->mu);
    const std::uint64_t n = impl_->counter++;
    s->id = "s" + detail::hex64(derive_seed(impl_->seed, "session", n));
    impl_->sessions[s->id] = s;
  }
  ojson j = session_json(*s);
  j["scenario"] = render_json(*scen);
  return j.dump();
}

std::string DemoService::get_session(const std::string& session_id) const {
  auto s = impl_->session(session_id);
  std::lock_guard lock(s->mu);
  return session_json(*s).dump();
}

std::string DemoService::step_session(const std::string& session_id, const std::string& request_body) {
  ojson body;
  try {
    body = ojson::parse(request_body);
  } catch (const nlohmann::json::exception&) {
    throw ConfigError("request body is not valid JSON");
  }
  if (!body.is_object()) throw ConfigError("request body must be a JSON object");
  return step_session(session_id, int_field(body, "move_dir"), int_field(body, "power_idx"));
}

std::string DemoService::step_session(const std::string& session_id, int move_dir, int power_idx) {
  auto s = impl_->session(session_id);
  if (move_dir < 0 || move_dir >= kNumDirections) throw ConfigError("move_dir must be in 0..5");
  if (power_idx < 0 || power_idx >= kNumPowerLevels) throw ConfigError("power_idx must be in 0..5");
  std::lock_guard lock(s->mu);
  if (s->finalized) throw ConflictError("session is finalized");
  if (s->state.done) throw ConflictError("episode is over; finalize the session");
  const Action a{static_cast<Direction>(move_dir), power_idx};
  const StepResult r = world::step(*s->scenario, s->state, a);
  StepRecord rec{static_cast<int>(s->traj.steps.size()), r.state.cell, a.joint_index(), r.features,
                 r.metrics.throughput_bps, r.metrics.interference_w, r.state.done};
  s->traj.steps.push_back(rec);
  s->state = r.state;
  s->features = r.features;
  s->last_active_ms = now_ms();
  ojson view = step_view(*s->scenario, rec, r.state, r.metrics);
  view["session_id"] = s->id;
  s->views.push_back(view);
  return view.dump();
}

std::string DemoService::finalize_session(const std::string& session_id) {
  auto s = impl_->session(session_id);
  std::lock_guard lock(s->mu);
  if (s->finalized) throw ConflictError("session already finalized");
  if (!s->state.done) throw ConflictError("episode is not finished");
  std::string id;
  {
    std::lock_guard store_lock(impl_->store_mu);
    id = impl_->store.save(s->traj);
  }
  s->finalized = true;
  s->trajectory_id = id;
  s->last_active_ms = now_ms();
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["session_id"] = s->id;
  j["trajectory_id"] = id;
  j["steps"] = s->traj.steps.size();
  return j.dump();
}

std::string DemoService::get_scenario(const std::string& scenario_id) const {
  return render_json(*impl_->scenario(scenario_id)).dump();
}

std::string DemoService::list_policies() const {
  std::shared_lock lock(impl_->mu);
  ojson arr = ojson::array();
  for (const auto& [id, p] : impl_->policies) {
    arr.push_back({{"policy_id", id}, {"kind", p.first}, {"scenario_id", impl_->policy_scenarios.at(id)}});
  }
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["policies"] = arr;
  return j.dump();
}

std::string DemoService::rollout_policy(const std::string& policy_id, const std::string& scenario_id,
                                        std::uint64_t seed) const {
  std::string text, trained_on;
  {
    std::shared_lock lock(impl_->mu);
    auto it = impl_->policies.find(policy_id);
    if (it == impl_->policies.end()) throw NotFoundError("unknown policy '" + policy_id + "'");
    text = it->second.second;
    trained_on = impl_->policy_scenarios.at(policy_id);
  }
  auto scen = impl_->scenario(scenario_id.empty() ? trained_on : scenario_id);
  if (scen->id() != trained_on)
    throw ConfigError("policy '" + policy_id + "' was trained on scenario " + trained_on + ", not " + scen->id());
  // A fresh instance per call keeps stochastic policies independent of call order.
  harness::LoadedPolicy p = harness::load_policy_json(text);
  const Trajectory traj = rollout(*scen, *p.policy, scen->source_cell(), derive_seed(seed, "eval", 0),
                                  {TrajectorySourceKind::Policy, p.policy->name()});
  ojson frames = ojson::array();
  UavState state = world::reset(*scen);
  for (const StepRecord& rec : traj.steps) {
    const StepResult r = world::step(*scen, state, Action::from_joint(rec.action));
    frames.push_back(step_view(*scen, rec, r.state, r.metrics));
    state = r.state;
  }
  ojson j;
  j["schema_version"] = kSchemaVersion;
  j["policy_id"] = policy_id;
  j["scenario_id"] = scen->id();
  j["start"] = cell_json(*scen, traj.start);
  j["frames"] = frames;
  return j.dump();
}

}  // namespace uavirl::demo
