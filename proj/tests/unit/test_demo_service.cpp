#include <doctest.h>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include <set>
#include <thread>

#include "uavirl/demo_service.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/harness.hpp"
#include "uavirl/rng.hpp"
#include "uavirl/tree.hpp"
#include "test_support.hpp"

using namespace uavirl;
using namespace uavirl::demo;
using json = nlohmann::json;

namespace {

const Scenario& scen() {
  static const Scenario s = Scenario::build(ScenarioConfig{}, 42);
  return s;
}

// NE x4 then N x2 from the source.
const std::vector<std::pair<int, int>> kRoute{{1, 0}, {1, 1}, {1, 0}, {1, 2}, {0, 0}, {0, 3}};

}  // namespace

TEST_CASE("new sessions start at the source with no hops") {
  test_support::TempDir dir("demo");
  DemoService svc(dir.path());
  const auto sid = svc.add_scenario(scen());
  CHECK(sid == scen().id());
  const auto a = json::parse(svc.create_session(sid));
  const auto b = json::parse(svc.create_session(sid));
  CHECK(a["schema_version"] == kSchemaVersion);
  CHECK(a["cell"]["index"] == 0);
  CHECK(a["hops_used"] == 0);
  CHECK(a["hops_remaining"] == scen().dist_limit());
  CHECK(a["done"] == false);
  CHECK(a["session_id"] != b["session_id"]);
  CHECK(a["scenario"]["cells"].size() == 25);
  CHECK(a["scenario"]["destination"]["index"] == 24);
  CHECK(json::parse(svc.get_session(a["session_id"])) ["hops_used"] == 0);
  CHECK_THROWS_AS(svc.create_session("feedfacefeedface"), NotFoundError);
  CHECK_THROWS_AS(svc.get_session("nope"), NotFoundError);
}

TEST_CASE("steps match the environment") {
  test_support::TempDir dir("demo");
  DemoService svc(dir.path());
  const auto sc = svc.add_scenario(scen());
  const std::string id = json::parse(svc.create_session(sc))["session_id"];
  UavState st = world::reset(scen());
  for (const auto& [d, p] : kRoute) {
    const auto v = json::parse(svc.step_session(id, d, p));
    const auto r = world::step(scen(), st, Action{static_cast<Direction>(d), p});
    st = r.state;
    CHECK(v["cell"]["index"] == scen().grid().index_of(r.state.cell));
    CHECK(v["hops_used"] == r.state.hops_used);
    CHECK(v["throughput_bps"].get<double>() == r.metrics.throughput_bps);
    CHECK(v["interference_w"].get<double>() == r.metrics.interference_w);
    CHECK(v["serving_bs"] == r.metrics.serving_bs);
    for (int k = 0; k < kNumFeatures; ++k) CHECK(v["features"][k].get<double>() == r.features[k]);
    CHECK(v["action"]["joint"] == Action{static_cast<Direction>(d), p}.joint_index());
    double sum = 0;
    for (const auto& c : v["adjacent_cells"]) sum += c["interference_w"].get<double>();
    CHECK(sum == doctest::Approx(r.metrics.interference_w).epsilon(1e-12));
  }
  const auto s = json::parse(svc.get_session(id));
  CHECK(s["done"] == true);
  CHECK(s["success"] == true);
  CHECK(s["steps"].size() == kRoute.size());
  CHECK_THROWS_AS(svc.step_session(id, 0, 0), ConflictError);
}

TEST_CASE("edge moves clamp and still use a hop") {
  test_support::TempDir dir("demo");
  DemoService svc(dir.path());
  const std::string id = json::parse(svc.create_session(svc.add_scenario(scen())))["session_id"];
  const auto v = json::parse(svc.step_session(id, R"({"move_dir":"S","power_idx":0})"));
  CHECK(v["cell"]["index"] == 0);
  CHECK(v["hops_used"] == 1);
}

TEST_CASE("request validation") {
  test_support::TempDir dir("demo");
  DemoService svc(dir.path());
  const std::string id = json::parse(svc.create_session(svc.add_scenario(scen())))["session_id"];
  CHECK_THROWS_AS(svc.step_session(id, 6, 0), ConfigError);
  CHECK_THROWS_AS(svc.step_session(id, 0, 6), ConfigError);
  CHECK_THROWS_AS(svc.step_session(id, -1, 0), ConfigError);
  CHECK_THROWS_AS(svc.step_session(id, "{"), ConfigError);
  CHECK_THROWS_AS(svc.step_session(id, "[1,2]"), ConfigError);
  CHECK_THROWS_AS(svc.step_session(id, R"({"move_dir":"UP","power_idx":0})"), ConfigError);
  CHECK_THROWS_AS(svc.step_session(id, R"({"move_dir":1})"), ConfigError);
  CHECK_THROWS_AS(svc.step_session("s0", 0, 0), NotFoundError);
  CHECK_THROWS_AS(svc.finalize_session(id), ConflictError);
  CHECK(json::parse(svc.get_session(id))["hops_used"] == 0);
  CHECK_THROWS_AS(svc.add_policy("p", "{}"), CorruptRecordError);
  CHECK_THROWS_AS(svc.rollout_policy("missing"), NotFoundError);
}

TEST_CASE("finalized demonstrations are stored and usable for imitation") {
  test_support::TempDir dir("demo");
  DemoService svc(dir.path());
  const auto sc = svc.add_scenario(scen());
  std::vector<std::string> traj_ids;
  for (int rep = 0; rep < 2; ++rep) {
    const std::string id = json::parse(svc.create_session(sc))["session_id"];
    for (const auto& [d, p] : kRoute) svc.step_session(id, d, p);
    const auto f = json::parse(svc.finalize_session(id));
    CHECK(f["steps"] == kRoute.size());
    traj_ids.push_back(f["trajectory_id"]);
    CHECK_THROWS_AS(svc.finalize_session(id), ConflictError);
    CHECK_THROWS_AS(svc.step_session(id, 0, 0), ConflictError);
    CHECK(json::parse(svc.get_session(id))["trajectory_id"] == traj_ids.back());
  }
  TrajectoryStore store(svc.trajectory_root());
  CHECK(store.list() == traj_ids);
  std::vector<Trajectory> demos;
  for (const auto& t : traj_ids) {
    demos.push_back(store.load(t));
    validate_trajectory(scen(), demos.back());
    CHECK(demos.back().source.kind == TrajectorySourceKind::HumanExpert);
  }
  const auto tree = bc::fit_tree(to_labeled_states(scen(), demos));
  CHECK(bc::evaluate_bc(tree, to_labeled_states(scen(), demos)) == 1.0);
}

TEST_CASE("policy rollout frames match evaluation") {
  test_support::TempDir dir("demo");
  DemoService svc(dir.path());
  svc.add_scenario(scen());
  svc.add_policy("sp", harness::heuristic_policy_json("shortest", 5, scen().id()));
  const auto list = json::parse(svc.list_policies());
  REQUIRE(list["policies"].size() == 1);
  CHECK(list["policies"][0]["kind"] == "shortest");

  const auto r1 = json::parse(svc.rollout_policy("sp", "", 11));
  const auto r2 = json::parse(svc.rollout_policy("sp", scen().id(), 11));
  CHECK(r1 == r2);
  auto lp = harness::load_policy_json(harness::heuristic_policy_json("shortest", 5, scen().id()));
  const auto rep = harness::evaluate(scen(), *lp.policy, lp.scenario_id, 1, std::nullopt, 11);
  const auto& path = rep.runs[0].path;
  REQUIRE(r1["frames"].size() + 1 == path.size());
  for (std::size_t i = 0; i < r1["frames"].size(); ++i) {
    CHECK(r1["frames"][i]["cell"]["index"] == scen().grid().index_of(path[i + 1]));
    CHECK(r1["frames"][i]["throughput_bps"].get<double>() == rep.series[i].throughput_mean);
  }

  ScenarioConfig other;
  other.dist_limit = 12;
  const auto oid = svc.add_scenario(Scenario::build(other, 42));
  CHECK_THROWS_AS(svc.rollout_policy("sp", oid), ConfigError);
}

TEST_CASE("interleaved sessions do not interfere") {
  test_support::TempDir dir("demo");
  DemoService svc(dir.path(), 9);
  const auto sc = svc.add_scenario(scen());
  Rng rng(123);
  const int n = 6;
  std::vector<std::string> ids;
  std::vector<UavState> mirror;
  for (int i = 0; i < n; ++i) {
    ids.push_back(json::parse(svc.create_session(sc))["session_id"]);
    mirror.push_back(world::reset(scen()));
  }
  CHECK(std::set<std::string>(ids.begin(), ids.end()).size() == static_cast<std::size_t>(n));
  for (int k = 0; k < 200; ++k) {
    const auto i = static_cast<std::size_t>(rng.below(n));
    if (mirror[i].done) continue;
    const int d = static_cast<int>(rng.below(6)), p = static_cast<int>(rng.below(6));
    svc.step_session(ids[i], d, p);
    mirror[i] = world::step(scen(), mirror[i], Action{static_cast<Direction>(d), p}).state;
  }
  for (int i = 0; i < n; ++i) {
    const auto s = json::parse(svc.get_session(ids[static_cast<std::size_t>(i)]));
    CHECK(s["hops_used"] == mirror[static_cast<std::size_t>(i)].hops_used);
    CHECK(s["cell"]["index"] == scen().grid().index_of(mirror[static_cast<std::size_t>(i)].cell));
  }

  // The same from several threads, one session each.
  std::vector<std::string> tids;
  for (int i = 0; i < 4; ++i) tids.push_back(json::parse(svc.create_session(sc))["session_id"]);
  std::vector<std::thread> threads;
  for (const auto& id : tids)
    threads.emplace_back([&svc, id] {
      for (const auto& [d, p] : kRoute) svc.step_session(id, d, p);
    });
  for (auto& t : threads) t.join();
  for (const auto& id : tids) CHECK(json::parse(svc.get_session(id))["success"] == true);
}

TEST_CASE("HTTP endpoints") {
  test_support::TempDir dir("http");
  DemoService svc(dir.path());
  const auto sc = svc.add_scenario(scen());
  svc.add_policy("sp", harness::heuristic_policy_json("shortest", 5, scen().id()));
  DemoHttpServer server(svc);
  const int port = server.bind("127.0.0.1", 0);
  REQUIRE(port > 0);
  std::thread th([&] { server.listen(); });
  httplib::Client cli("127.0.0.1", port);

  auto res = cli.Post("/sessions", json{{"scenario_id", sc}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 201);
  const std::string id = json::parse(res->body)["session_id"];

  res = cli.Get("/sessions/" + id);
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["hops_used"] == 0);

  res = cli.Post("/sessions/" + id + "/step", R"({"move_dir":"NE","power_idx":2})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["action"]["joint"] == 8);

  res = cli.Post("/sessions/" + id + "/step", R"({"move_dir":9,"power_idx":0})", "application/json");
  REQUIRE(res);
  CHECK(res->status == 400);
  const auto err = json::parse(res->body);
  CHECK(err["schema_version"] == kSchemaVersion);
  CHECK(err["error"]["message"].is_string());

  res = cli.Post("/sessions/" + id + "/finalize", "", "application/json");
  REQUIRE(res);
  CHECK(res->status == 409);

  res = cli.Get("/sessions/nope");
  REQUIRE(res);
  CHECK(res->status == 404);
  res = cli.Post("/sessions", json{{"scenario_id", "0123"}}.dump(), "application/json");
  REQUIRE(res);
  CHECK(res->status == 404);

  res = cli.Get("/scenarios/" + sc);
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body)["grid"]["cols"] == 5);

  res = cli.Get("/policies");
  REQUIRE(res);
  CHECK(json::parse(res->body)["policies"][0]["policy_id"] == "sp");

  res = cli.Get("/policies/sp/rollout?seed=11");
  REQUIRE(res);
  CHECK(res->status == 200);
  CHECK(json::parse(res->body) == json::parse(svc.rollout_policy("sp", "", 11)));
  res = cli.Get("/policies/zz/rollout");
  REQUIRE(res);
  CHECK(res->status == 404);

  server.stop();
  th.join();
  CHECK_FALSE(server.running());
}
