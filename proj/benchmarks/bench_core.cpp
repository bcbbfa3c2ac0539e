#include <benchmark/benchmark.h>

#include "uavirl/channel.hpp"
#include "uavirl/expert.hpp"
#include "uavirl/mlp.hpp"
#include "uavirl/qp.hpp"
#include "uavirl/rng.hpp"
#include "uavirl/tree.hpp"
#include "uavirl/world.hpp"

using namespace uavirl;

namespace {

const Scenario& scen() {
  static const Scenario s = Scenario::build(ScenarioConfig{}, 42);
  return s;
}

void BM_PathlossTotal(benchmark::State& state) {
  const channel::ChannelParams p;
  double d = 10.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(channel::pathloss_total({d, 50.0}, p));
    d = d > 500.0 ? 10.0 : d + 1.0;
  }
}
BENCHMARK(BM_PathlossTotal);

void BM_ScenarioBuild(benchmark::State& state) {
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(Scenario::build(ScenarioConfig{}, seed++));
}
BENCHMARK(BM_ScenarioBuild);

void BM_WorldStep(benchmark::State& state) {
  Rng rng(1);
  UavState s = world::reset(scen());
  for (auto _ : state) {
    if (s.done) s = world::reset(scen());
    s = world::step(scen(), s, Action::from_joint(static_cast<int>(rng.below(kNumActions)))).state;
  }
}
BENCHMARK(BM_WorldStep);

void BM_MlpForward(benchmark::State& state) {
  Rng rng(2);
  const auto p = dqn::MlpParams::glorot(rng);
  const FeatureVector phi{0.3, 0.1, 0.0, 0.8, 0.4};
  for (auto _ : state) benchmark::DoNotOptimize(dqn::mlp_forward(p, phi));
}
BENCHMARK(BM_MlpForward);

void BM_MlpBackwardBatch24(benchmark::State& state) {
  Rng rng(3);
  const auto p = dqn::MlpParams::glorot(rng);
  std::vector<dqn::Sample> batch;
  std::vector<double> targets;
  for (int i = 0; i < 24; ++i) {
    FeatureVector f{};
    for (double& v : f) v = rng.uniform01();
    batch.push_back({f, static_cast<int>(rng.below(kNumActions))});
    targets.push_back(rng.uniform(-1.0, 1.0));
  }
  for (auto _ : state) benchmark::DoNotOptimize(dqn::backward(p, batch, targets));
}
BENCHMARK(BM_MlpBackwardBatch24);

void BM_MinNormQp(benchmark::State& state) {
  Rng rng(4);
  FeatureVector e{};
  for (double& v : e) v = rng.uniform(0.0, 100.0);
  std::vector<FeatureVector> ls(static_cast<std::size_t>(state.range(0)));
  for (auto& m : ls)
    for (double& v : m) v = rng.uniform(0.0, 100.0);
  for (auto _ : state) benchmark::DoNotOptimize(solve_min_norm_svm(e, ls));
}
BENCHMARK(BM_MinNormQp)->Arg(1)->Arg(10)->Arg(25);

void BM_FitTree(benchmark::State& state) {
  const auto data = to_labeled_states(scen(), bc::scripted_expert(scen(), {}, 10));
  for (auto _ : state) benchmark::DoNotOptimize(bc::fit_tree(data));
}
BENCHMARK(BM_FitTree);

void BM_ExpertPlan(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(bc::plan_expert_route(scen(), {}, scen().source_cell()));
}
BENCHMARK(BM_ExpertPlan);

}  // namespace

BENCHMARK_MAIN();
