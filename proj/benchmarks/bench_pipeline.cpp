#include <benchmark/benchmark.h>

#include <filesystem>
#include <random>

#include "oracles.hpp"
#include "probetopo/experiment.hpp"
#include "probetopo/grouping.hpp"
#include "probetopo/level_sets.hpp"
#include "probetopo/probing.hpp"
#include "probetopo/recovery.hpp"
#include "probetopo/reduced_grid.hpp"
#include "probetopo/resistance.hpp"

using namespace probetopo;

namespace {

FeederGraph random_feeder(int n) {
  std::mt19937_64 rng(static_cast<std::uint64_t>(n));
  return build_feeder(oracle::random_tree(rng, n));
}

EstimatedMatrix exact(const FeederGraph& g, std::vector<NodeId> rows, std::vector<NodeId> cols) {
  EstimatedMatrix e;
  e.values = resistance_matrix(g).block(rows, cols);
  e.rows = std::move(rows);
  e.cols = std::move(cols);
  return e;
}

std::vector<NodeId> buses(const FeederGraph& g) {
  return {g.nodes().begin() + 1, g.nodes().end()};
}

void BM_ResistanceMatrix(benchmark::State& state) {
  const auto g = random_feeder(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(resistance_matrix(g));
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ResistanceMatrix)->RangeMultiplier(4)->Range(16, 1024)->Complexity();

void BM_ReduceGrid(benchmark::State& state) {
  const auto g = random_feeder(static_cast<int>(state.range(0)));
  const auto p = g.leaves();
  for (auto _ : state) benchmark::DoNotOptimize(reduce_grid(g, p));
}
BENCHMARK(BM_ReduceGrid)->RangeMultiplier(4)->Range(16, 1024);

void BM_GroupColumns(benchmark::State& state) {
  const auto g = random_feeder(static_cast<int>(state.range(0)));
  const auto all = buses(g);
  const auto estimate = exact(g, all, all);
  for (auto _ : state) benchmark::DoNotOptimize(group_columns(estimate, 0.0, Mode::Complete));
}
BENCHMARK(BM_GroupColumns)->RangeMultiplier(4)->Range(16, 256);

void BM_RecoverFull(benchmark::State& state) {
  const auto g = random_feeder(static_cast<int>(state.range(0)));
  const auto all = buses(g);
  const auto families =
      assemble_family(group_columns(exact(g, all, all), 0.0, Mode::Complete), Mode::Complete);
  for (auto _ : state) benchmark::DoNotOptimize(recover_full(families, all));
}
BENCHMARK(BM_RecoverFull)->RangeMultiplier(4)->Range(16, 256);

void BM_RecoverPartial(benchmark::State& state) {
  const auto g = random_feeder(static_cast<int>(state.range(0)));
  const auto p = g.leaves();
  const auto families =
      assemble_family(group_columns(exact(g, p, p), 0.0, Mode::Partial), Mode::Partial);
  for (auto _ : state) benchmark::DoNotOptimize(recover_partial(families, p));
}
BENCHMARK(BM_RecoverPartial)->RangeMultiplier(4)->Range(16, 256);

void BM_Trial37(benchmark::State& state) {
  const Mode mode = state.range(0) == 0 ? Mode::Complete : Mode::Partial;
  auto config = load_config(std::filesystem::path(PROBETOPO_DATA_DIR) /
                            (mode == Mode::Complete ? "table1_complete.json"
                                                    : "table1_partial.json"));
  const auto setup = prepare_experiment(config);
  const auto plan = design_plan(setup.r_min, setup.sigma, setup.probing, setup.delta);
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(run_trial(setup, plan, mode, ++seed));
}
BENCHMARK(BM_Trial37)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
