#include <CLI11.hpp>

#include <csignal>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>

#include "uavirl/demo_service.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/expert.hpp"
#include "uavirl/harness.hpp"
#include "uavirl/irl.hpp"
#include "uavirl/scenario.hpp"
#include "uavirl/trajectories.hpp"

using namespace uavirl;

namespace {

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void spit(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out || !(out << text)) throw ConfigError("cannot write " + path.string());
}

Scenario open_scenario(const std::string& path, const std::string& channel) {
  if (path.empty()) throw ConfigError("--scenario is required");
  Scenario s = load_scenario(path);
  if (!channel.empty()) {
    const auto mode = parse_channel_mode(channel);
    if (mode != s.channel().channel_mode) s = s.with_channel_mode(mode);
  }
  return s;
}

// "7" is a BS index, "col,row" an offset coordinate.
CellCoord parse_cell(const Scenario& s, const std::string& text) {
  int a = 0, b = 0;
  char extra = 0;
  if (std::sscanf(text.c_str(), "%d,%d%c", &a, &b, &extra) == 2) {
    const CellCoord c = offset_to_axial({a, b});
    if (!s.grid().contains(c)) throw ConfigError("start cell " + text + " is off the grid");
    return c;
  }
  if (std::sscanf(text.c_str(), "%d%c", &a, &extra) == 1) {
    if (a < 0 || a >= s.num_cells()) throw ConfigError("BS index " + text + " is out of range");
    return s.grid().cell_at(a);
  }
  throw ConfigError("cannot parse cell '" + text + "' (use a BS index or col,row)");
}

std::pair<std::string, std::string> split_label(const std::string& spec) {
  const auto eq = spec.find('=');
  if (eq == std::string::npos) {
    const std::filesystem::path p(spec);
    return {p.parent_path().filename().string().empty() ? p.stem().string() : p.parent_path().filename().string(),
            spec};
  }
  return {spec.substr(0, eq), spec.substr(eq + 1)};
}

demo::DemoHttpServer* g_server = nullptr;
void on_signal(int) {
  if (g_server) g_server->stop();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"UAV path and power planning via apprenticeship learning"};
  app.require_subcommand(1);

  std::string scenario_path, channel, out;
  std::uint64_t seed = 42;
  bool full = false;
  auto common = [&](CLI::App* sub, bool needs_scenario) {
    auto* opt = sub->add_option("--scenario", scenario_path, "Scenario JSON file");
    if (needs_scenario) opt->required();
    sub->add_option("--seed", seed, "Master seed")->capture_default_str();
    sub->add_option("--channel", channel, "Channel mode override")->check(CLI::IsMember({"probabilistic", "los"}));
    sub->add_option("--out", out, "Output path");
    sub->add_flag("--full", full, "Use full-scale episode counts");
  };

  // scenario gen
  auto* scen = app.add_subcommand("scenario", "Scenario files");
  scen->require_subcommand(1);
  auto* scen_gen = scen->add_subcommand("gen", "Generate a scenario with seeded UE placement");
  std::string config_path;
  common(scen_gen, false);
  scen_gen->add_option("--config", config_path, "Optional scenario config JSON");

  // expert gen
  auto* exp = app.add_subcommand("expert", "Expert demonstrations");
  exp->require_subcommand(1);
  auto* exp_gen = exp->add_subcommand("gen", "Write scripted-expert trajectories to a store");
  int n_trajs = 10;
  double iw = 1.0, hw = 0.1;
  common(exp_gen, true);
  exp_gen->add_option("-n,--count", n_trajs, "Number of trajectories")->capture_default_str();
  exp_gen->add_option("--interference-weight", iw)->capture_default_str();
  exp_gen->add_option("--hop-weight", hw)->capture_default_str();

  // train
  auto* train = app.add_subcommand("train", "Train a policy");
  std::string kind;
  harness::RunConfig rc;
  int num_eps = -1;
  std::string experts_dir;
  train->add_option("kind", kind, "irl-lfa | irl-dqn | bc | shortest | random")->required();
  common(train, true);
  train->add_option("--num-eps", num_eps, "Training episodes (default 2000, 10000 with --full)");
  train->add_option("--eps-irl", rc.eps_irl)->capture_default_str();
  train->add_option("--max-iters", rc.max_iters)->capture_default_str();
  train->add_option("--eval-runs", rc.eval_runs)->capture_default_str();
  train->add_option("--experts", experts_dir, "Trajectory store with demonstrations (default: scripted)");
  train->add_option("--n-experts", rc.expert_trajs, "Scripted demonstrations when --experts is absent")
      ->capture_default_str();

  // eval
  auto* eval = app.add_subcommand("eval", "Evaluate a trained policy");
  std::string policy_path, weights_path, start;
  int eval_runs = 25;
  common(eval, true);
  eval->add_option("--policy", policy_path, "policy.json")->required();
  eval->add_option("--weights", weights_path, "weights.json for the reward column");
  eval->add_option("--eval-runs", eval_runs)->capture_default_str();
  eval->add_option("--start", start, "Start cell (BS index or col,row)");

  // unseen-eval
  auto* unseen = app.add_subcommand("unseen-eval", "Compare policies from a start cell they were not trained on");
  std::vector<std::string> policy_specs;
  std::string unseen_start = "5";
  common(unseen, true);
  unseen->add_option("--policy", policy_specs, "label=policy.json (repeatable)")->required();
  unseen->add_option("--start", unseen_start, "Start cell (BS index or col,row)")->capture_default_str();
  unseen->add_option("--eval-runs", eval_runs)->capture_default_str();

  // serve
  auto* serve = app.add_subcommand("serve", "Run the demonstration service");
  std::vector<std::string> serve_scenarios;
  std::vector<std::string> serve_policies;
  std::string host = "127.0.0.1", store_dir = "demonstrations";
  int port = 8080;
  serve->add_option("--scenario", serve_scenarios, "Scenario JSON file (repeatable)")->required();
  serve->add_option("--seed", seed, "Session id seed")->capture_default_str();
  serve->add_option("--channel", channel, "Channel mode override")->check(CLI::IsMember({"probabilistic", "los"}));
  serve->add_option("--policy", serve_policies, "id=policy.json (repeatable)");
  serve->add_option("--out", store_dir, "Trajectory store for finalized sessions")->capture_default_str();
  serve->add_option("--host", host)->capture_default_str();
  serve->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (scen_gen->parsed()) {
      ScenarioConfig cfg = config_path.empty() ? ScenarioConfig{} : config_from_json(slurp(config_path));
      if (!channel.empty()) cfg.channel.channel_mode = parse_channel_mode(channel);
      const Scenario s = Scenario::build(cfg, seed);
      const std::string path = out.empty() ? "scenario.json" : out;
      save_scenario(s, path);
      std::cout << "scenario " << s.id() << " -> " << path << "\n";
    } else if (exp_gen->parsed()) {
      const Scenario s = open_scenario(scenario_path, channel);
      bc::ExpertOracleConfig ecfg;
      ecfg.interference_weight = iw;
      ecfg.hop_weight = hw;
      const auto trajs = bc::scripted_expert(s, ecfg, n_trajs);
      TrajectoryStore store(out.empty() ? "experts" : out);
      for (const auto& t : trajs) std::cout << store.save(t) << "\n";
    } else if (train->parsed()) {
      const Scenario s = open_scenario(scenario_path, channel);
      rc.kind = harness::parse_learner_kind(kind);
      rc.master_seed = seed;
      rc.num_eps = num_eps > 0 ? num_eps : (full ? harness::kFullEpisodes : harness::kDeskEpisodes);
      rc.out_dir = out.empty() ? "out" : out;
      rc.expert_dir = experts_dir;
      const auto art = harness::run_training(s, rc, &std::cout);
      std::cout << "policy " << art.policy.string() << "\n";
      if (!art.weights.empty()) std::cout << "weights " << art.weights.string() << "\n";
    } else if (eval->parsed()) {
      const Scenario s = open_scenario(scenario_path, channel);
      harness::LoadedPolicy p = harness::load_policy(policy_path);
      std::optional<RewardWeights> w;
      if (!weights_path.empty()) w = weights_from_json(slurp(weights_path)).weights;
      std::optional<CellCoord> sc;
      if (!start.empty()) sc = parse_cell(s, start);
      const auto rep =
          harness::evaluate(s, *p.policy, p.scenario_id, eval_runs, sc, seed, w ? &*w : nullptr);
      const std::filesystem::path dir = out.empty() ? "eval" : out;
      harness::export_metrics(rep.series, dir / "metrics.csv");
      spit(dir / "summary.json", harness::eval_summary_json(rep));
      std::printf("runs %d  success_rate %.4f  mean_final_distance %.4f  mean_steps %.4f  mean_interference %.6g W\n",
                  eval_runs, rep.success_rate, rep.mean_final_distance, rep.mean_steps,
                  rep.mean_total_interference_w);
    } else if (unseen->parsed()) {
      const Scenario s = open_scenario(scenario_path, channel);
      std::vector<std::pair<std::string, harness::LoadedPolicy>> arts;
      for (const auto& spec : policy_specs) {
        auto [label, path] = split_label(spec);
        arts.emplace_back(label, harness::load_policy(path));
      }
      const CellCoord sc = parse_cell(s, unseen_start);
      const auto entries = harness::unseen_start_eval(s, arts, sc, eval_runs, seed);
      const std::string text = harness::format_unseen_report(s, entries, sc);
      std::cout << text;
      if (!out.empty()) {
        spit(std::filesystem::path(out) / "unseen_report.txt", text);
        for (const auto& e : entries) harness::export_metrics(e.report.series, std::filesystem::path(out) / (e.label + ".csv"));
      }
    } else if (serve->parsed()) {
      demo::DemoService service(store_dir, seed);
      for (const auto& path : serve_scenarios) {
        std::cout << "scenario " << service.add_scenario(open_scenario(path, channel)) << "\n";
      }
      for (const auto& spec : serve_policies) {
        auto [id, path] = split_label(spec);
        service.add_policy(id, slurp(path));
      }
      demo::DemoHttpServer server(service);
      const int bound = server.bind(host, port);
      g_server = &server;
      std::signal(SIGINT, on_signal);
      std::signal(SIGTERM, on_signal);
      std::cout << "listening on http://" << host << ":" << bound << std::endl;
      server.listen();
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const CorruptRecordError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NotFoundError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
