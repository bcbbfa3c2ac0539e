#include "uavirl/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>

#include "json_util.hpp"
#include "uavirl/dqn.hpp"
#include "uavirl/errors.hpp"
#include "uavirl/expert.hpp"
#include "uavirl/lfa.hpp"
#include "uavirl/tree.hpp"

namespace uavirl::harness {

using detail::format_double;
using detail::ojson;
using detail::require;

std::string learner_kind_name(LearnerKind kind) {
  switch (kind) {
    case LearnerKind::IrlLfa: return "irl-lfa";
    case LearnerKind::IrlDqn: return "irl-dqn";
    case LearnerKind::Bc: return "bc";
    case LearnerKind::Shortest: return "shortest";
    case LearnerKind::Random: return "random";
  }
  return "?";
}

LearnerKind parse_learner_kind(const std::string& text) {
  for (LearnerKind k : {LearnerKind::IrlLfa, LearnerKind::IrlDqn, LearnerKind::Bc, LearnerKind::Shortest,
                        LearnerKind::Random}) {
    if (learner_kind_name(k) == text) return k;
  }
  throw ConfigError("unknown learner kind '" + text + "' (expected irl-lfa, irl-dqn, bc, shortest or random)");
}

void RunConfig::validate() const {
  if (eval_runs < 1) throw ConfigError("eval_runs must be >= 1");
  if (num_eps < 1) throw ConfigError("num_eps must be >= 1");
  if (max_iters < 1) throw ConfigError("max_iters must be >= 1");
  if (!(eps_irl > 0.0)) throw ConfigError("eps_irl must be > 0");
  if (expert_trajs < 1) throw ConfigError("expert_trajs must be >= 1");
  if (!(bc_train_fraction > 0.0 && bc_train_fraction < 1.0)) throw ConfigError("bc_train_fraction must be in (0, 1)");
  if (out_dir.empty()) throw ConfigError("out_dir must be set");
}

Scenario effective_scenario(const Scenario& base, const RunConfig& config) {
  if (!config.channel_mode || *config.channel_mode == base.channel().channel_mode) return base;
  return base.with_channel_mode(*config.channel_mode);
}

std::vector<Trajectory> expert_demonstrations(const Scenario& scenario, const RunConfig& config) {
  if (config.expert_dir.empty()) return bc::scripted_expert(scenario, bc::ExpertOracleConfig{}, config.expert_trajs);
  TrajectoryStore store(config.expert_dir);
  std::vector<Trajectory> out;
  for (const std::string& id : store.list()) {
    Trajectory t = store.load(id);
    if (t.scenario_id != scenario.id())
      throw ConfigError("expert trajectory " + id + " belongs to scenario " + t.scenario_id + ", not " + scenario.id());
    out.push_back(std::move(t));
  }
  if (out.empty()) throw ConfigError("expert store " + config.expert_dir.string() + " is empty");
  return out;
}

namespace {

void write(const std::filesystem::path& p, const std::string& text) { detail::write_file(p.string(), text); }

std::string irl_table_header() { return "iter  hyper_distance        l2_gap"; }

std::string irl_table_row(const IrlIterationLog& e) {
  char buf[128];
  std::snprintf(buf, sizeof(buf), "%4d  %-20.12g  %-20.12g", e.iter, e.hyper_distance, e.l2_gap);
  return buf;
}

}  // namespace

TrainArtifacts run_training(const Scenario& base, const RunConfig& config, std::ostream* log) {
  config.validate();
  const Scenario scenario = effective_scenario(base, config);
  std::filesystem::create_directories(config.out_dir);
  TrainArtifacts art;
  art.policy = config.out_dir / "policy.json";
  art.report = config.out_dir / "report.txt";
  std::ostringstream report;
  report << "scenario " << scenario.id() << " channel " << channel_mode_name(scenario.channel().channel_mode) << "\n";
  report << "kind " << learner_kind_name(config.kind) << " seed " << config.master_seed << "\n";

  switch (config.kind) {
    case LearnerKind::IrlLfa:
    case LearnerKind::IrlDqn: {
      const auto experts = expert_demonstrations(scenario, config);
      IrlConfig irl;
      irl.eps_irl = config.eps_irl;
      irl.max_iters = config.max_iters;
      irl.eval_runs = config.eval_runs;
      irl.master_seed = config.master_seed;

      std::unique_ptr<PolicyLearner> learner;
      lfa::LfaConfig lcfg;
      dqn::DqnConfig dcfg;
      lcfg.num_eps = config.num_eps;
      dcfg.num_eps = config.num_eps;
      lcfg.gamma = dcfg.gamma = irl.gamma;
      if (config.kind == LearnerKind::IrlLfa) {
        learner = std::make_unique<lfa::LfaLearner>(lcfg);
      } else {
        learner = std::make_unique<dqn::DqnLearner>(dcfg);
      }

      if (log) *log << irl_table_header() << "\n";
      report << irl_table_header() << "\n";
      IrlResult result = run_irl(scenario, experts, *learner, irl, [&](const IrlIterationLog& e) {
        if (log) *log << irl_table_row(e) << std::endl;
        report << irl_table_row(e) << "\n";
      });
      report << "termination " << termination_name(result.termination) << " returned_iter "
             << result.log[static_cast<std::size_t>(result.returned_iter)].iter << "\n";
      if (log) *log << "termination " << termination_name(result.termination) << "\n";

      const std::string expert_hash = trajectory_set_hash(experts);
      WeightsFile wf{result.weights, scenario.id(), learner->kind(), config.eps_irl, expert_hash,
                     termination_name(result.termination)};
      const std::string weights_text = weights_to_json(wf);
      const std::string weights_hash = detail::hex64(fnv1a64(weights_text));
      art.weights = config.out_dir / "weights.json";
      art.irl_log = config.out_dir / "irl_log.json";
      write(art.weights, weights_text);
      write(art.irl_log, irl_log_to_json(result.log));
      if (config.kind == LearnerKind::IrlLfa) {
        const auto& p = dynamic_cast<const lfa::LfaPolicy&>(*result.policy);
        write(art.policy, lfa::model_to_json(p.model(), scenario.id(), weights_hash, lcfg));
      } else {
        const auto& p = dynamic_cast<const dqn::DqnPolicy&>(*result.policy);
        write(art.policy, dqn::model_to_json(p.params(), scenario.id(), weights_hash, dcfg));
      }
      art.termination = result.termination;
      break;
    }
    case LearnerKind::Bc: {
      const auto experts = expert_demonstrations(scenario, config);
      const auto split = bc::train_test_split(to_labeled_states(scenario, experts), config.bc_train_fraction,
                                              config.master_seed);
      const bc::DecisionTree tree = bc::fit_tree(split.train);
      const double acc = split.test.empty() ? 1.0 : bc::evaluate_bc(tree, split.test);
      write(art.policy, bc::tree_to_json(tree, scenario.id()));
      art.bc_accuracy = acc;
      char buf[160];
      std::snprintf(buf, sizeof(buf), "bc accuracy %.6f train %zu test %zu split_seed %llu depth %d leaves %d\n", acc,
                    split.train.size(), split.test.size(), static_cast<unsigned long long>(config.master_seed),
                    tree.depth(), tree.num_leaves());
      report << buf;
      if (log) *log << buf;
      break;
    }
    case LearnerKind::Shortest:
    case LearnerKind::Random:
      write(art.policy, heuristic_policy_json(learner_kind_name(config.kind), config.master_seed, scenario.id()));
      break;
  }
  write(art.report, report.str());
  return art;
}

std::string heuristic_policy_json(const std::string& kind, std::uint64_t seed, const std::string& scenario_id) {
  ojson j;
  j["schema_version"] = 1;
  j["kind"] = kind;
  j["scenario_id"] = scenario_id;
  j["seed"] = std::to_string(seed);
  return j.dump(2) + "\n";
}

LoadedPolicy load_policy_json(const std::string& text) {
  std::string kind;
  try {
    kind = require(ojson::parse(text), "kind").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw CorruptRecordError(std::string("policy artifact: ") + e.what());
  }
  LoadedPolicy out;
  out.kind = kind;
  if (kind == "lfa") {
    out.policy = std::make_unique<lfa::LfaPolicy>(lfa::model_from_json(text, &out.scenario_id));
  } else if (kind == "dqn") {
    out.policy = std::make_unique<dqn::DqnPolicy>(dqn::model_from_json(text, &out.scenario_id));
  } else if (kind == "tree") {
    out.policy = std::make_unique<bc::TreePolicy>(bc::tree_from_json(text, &out.scenario_id));
  } else if (kind == "shortest" || kind == "random") {
    const ojson j = ojson::parse(text);
    out.scenario_id = require(j, "scenario_id").get<std::string>();
    std::uint64_t seed = 0;
    try {
      seed = std::stoull(require(j, "seed").get<std::string>());
    } catch (const std::logic_error&) {
      throw CorruptRecordError("policy artifact: bad seed");
    }
    if (kind == "shortest")
      out.policy = std::make_unique<bc::ShortestPathPolicy>(seed);
    else
      out.policy = std::make_unique<bc::RandomPolicy>(seed);
  } else {
    throw CorruptRecordError("policy artifact: unknown kind '" + kind + "'");
  }
  return out;
}

LoadedPolicy load_policy(const std::filesystem::path& path) { return load_policy_json(detail::read_file(path.string())); }

namespace {

// Population mean and standard deviation.
std::pair<double, double> mean_std(const std::vector<double>& xs) {
  double m = 0.0;
  for (double x : xs) m += x;
  m /= static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

}  // namespace

EvalReport summarize_runs(const Scenario& scenario, const std::vector<Trajectory>& runs, const RewardWeights* weights) {
  if (runs.empty()) throw ContractError("summarize_runs: no runs");
  EvalReport rep;
  const CellCoord dest = scenario.dest_cell();
  std::size_t min_len = runs.front().steps.size();
  for (const Trajectory& t : runs) {
    min_len = std::min(min_len, t.steps.size());
    RunSummary s;
    s.path.push_back(t.start);
    double tp = 0.0;
    for (const StepRecord& r : t.steps) {
      s.path.push_back(r.cell);
      s.total_interference_w += r.interference_w;
      tp += r.throughput_bps;
      if (weights) s.total_reward += reward(*weights, r.features);
    }
    s.steps = static_cast<int>(t.steps.size());
    s.mean_throughput_bps = t.steps.empty() ? 0.0 : tp / static_cast<double>(t.steps.size());
    s.final_distance = hex_distance(s.path.back(), dest);
    s.success = s.final_distance == 0;
    rep.mean_final_distance += s.final_distance;
    rep.success_rate += s.success ? 1.0 : 0.0;
    rep.mean_steps += s.steps;
    rep.mean_total_interference_w += s.total_interference_w;
    rep.runs.push_back(std::move(s));
  }
  const double n = static_cast<double>(runs.size());
  rep.mean_final_distance /= n;
  rep.success_rate /= n;
  rep.mean_steps /= n;
  rep.mean_total_interference_w /= n;

  std::vector<double> acc(runs.size(), 0.0);
  for (std::size_t t = 0; t < min_len; ++t) {
    std::vector<double> tp, in, dist;
    for (std::size_t i = 0; i < runs.size(); ++i) {
      const StepRecord& r = runs[i].steps[t];
      tp.push_back(r.throughput_bps);
      in.push_back(r.interference_w);
      dist.push_back(hex_distance(r.cell, dest));
      if (weights) acc[i] += reward(*weights, r.features);
    }
    MetricsRow row;
    row.index = static_cast<int>(t) + 1;
    std::tie(row.throughput_mean, row.throughput_std) = mean_std(tp);
    std::tie(row.interference_mean, row.interference_std) = mean_std(in);
    row.distance = mean_std(dist).first;
    row.reward = mean_std(acc).first;
    rep.series.push_back(row);
  }
  return rep;
}

EvalReport evaluate(const Scenario& scenario, Policy& policy, const std::string& artifact_scenario_id, int eval_runs,
                    std::optional<CellCoord> start, std::uint64_t seed, const RewardWeights* weights) {
  if (eval_runs < 1) throw ConfigError("eval_runs must be >= 1");
  if (artifact_scenario_id != scenario.id())
    throw ConfigError("policy was trained on scenario " + artifact_scenario_id + ", not " + scenario.id());
  const CellCoord s = start.value_or(scenario.source_cell());
  if (!scenario.grid().contains(s)) throw ConfigError("start cell is off the grid");
  std::vector<Trajectory> runs;
  for (int i = 0; i < eval_runs; ++i) {
    runs.push_back(rollout(scenario, policy, s, derive_seed(seed, "eval", static_cast<std::uint64_t>(i)),
                           {TrajectorySourceKind::Policy, policy.name()}));
  }
  return summarize_runs(scenario, runs, weights);
}

std::vector<UnseenStartEntry> unseen_start_eval(const Scenario& scenario,
                                                std::vector<std::pair<std::string, LoadedPolicy>>& artifacts,
                                                CellCoord start, int eval_runs, std::uint64_t seed) {
  std::vector<UnseenStartEntry> out;
  for (auto& [label, art] : artifacts) {
    UnseenStartEntry e;
    e.label = label;
    e.report = evaluate(scenario, *art.policy, art.scenario_id, eval_runs, start, seed);
    e.reached = e.report.success_rate == 1.0;
    out.push_back(std::move(e));
  }
  return out;
}

std::string format_unseen_report(const Scenario& scenario, const std::vector<UnseenStartEntry>& entries,
                                 CellCoord start) {
  std::ostringstream os;
  os << "start BS" << scenario.grid().index_of(start) << " -> destination BS" << scenario.grid().index_of(scenario.dest_cell())
     << ", dist_limit " << scenario.dist_limit() << "\n";
  for (const auto& e : entries) {
    const RunSummary& r = e.report.runs.front();
    os << e.label << ": " << (e.reached ? "reaches destination" : "does not reach destination") << "; steps "
       << r.steps << ", final distance " << r.final_distance << ", interference "
       << format_double(e.report.mean_total_interference_w) << " W\n  path";
    for (CellCoord c : r.path) os << " BS" << scenario.grid().index_of(c);
    os << "\n";
  }
  return os.str();
}

std::string metrics_csv(const std::vector<MetricsRow>& series) {
  std::string out = "index,throughput_mean,throughput_std,interference_mean,interference_std,distance,reward\n";
  char buf[256];
  for (const MetricsRow& r : series) {
    std::snprintf(buf, sizeof(buf), "%d,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", r.index, r.throughput_mean,
                  r.throughput_std, r.interference_mean, r.interference_std, r.distance, r.reward);
    out += buf;
  }
  return out;
}

std::vector<MetricsRow> parse_metrics_csv(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) ||
      line != "index,throughput_mean,throughput_std,interference_mean,interference_std,distance,reward")
    throw CorruptRecordError("metrics csv: unexpected header");
  std::vector<MetricsRow> out;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    MetricsRow r;
    if (std::sscanf(line.c_str(), "%d,%lf,%lf,%lf,%lf,%lf,%lf", &r.index, &r.throughput_mean, &r.throughput_std,
                    &r.interference_mean, &r.interference_std, &r.distance, &r.reward) != 7)
      throw CorruptRecordError("metrics csv: bad row '" + line + "'");
    out.push_back(r);
  }
  return out;
}

void export_metrics(const std::vector<MetricsRow>& series, const std::filesystem::path& path) {
  if (series.empty()) throw ContractError("export_metrics: empty series");
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  detail::write_file(path.string(), metrics_csv(series));
}

std::string eval_summary_json(const EvalReport& report) {
  ojson j;
  j["schema_version"] = 1;
  j["mean_final_distance"] = format_double(report.mean_final_distance);
  j["success_rate"] = format_double(report.success_rate);
  j["mean_steps"] = format_double(report.mean_steps);
  j["mean_total_interference_w"] = format_double(report.mean_total_interference_w);
  ojson runs = ojson::array();
  for (const RunSummary& r : report.runs) {
    ojson rj;
    rj["steps"] = r.steps;
    rj["final_distance"] = r.final_distance;
    rj["success"] = r.success;
    rj["total_interference_w"] = format_double(r.total_interference_w);
    rj["mean_throughput_bps"] = format_double(r.mean_throughput_bps);
    rj["total_reward"] = format_double(r.total_reward);
    ojson path = ojson::array();
    for (CellCoord c : r.path) path.push_back({c.q, c.r});
    rj["path"] = path;
    runs.push_back(rj);
  }
  j["runs"] = runs;
  return j.dump(2) + "\n";
}

}  // namespace uavirl::harness
