#include <benchmark/benchmark.h>

#include <random>
#include <vector>

#include "secgame/io.hpp"
#include "secgame/solver.hpp"
#include "secgame/state_graph.hpp"

namespace {

std::vector<std::vector<double>> random_matrix(std::mt19937_64* rng,
                                               std::size_t rows,
                                               std::size_t cols) {
  std::uniform_real_distribution<double> entry(-100.0, 100.0);
  std::vector<std::vector<double>> m(rows, std::vector<double>(cols));
  for (auto& row : m) {
    for (auto& v : row) v = entry(*rng);
  }
  return m;
}

void BM_SolveMatrixGame(benchmark::State& state) {
  std::mt19937_64 rng(7);
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<std::vector<double>>> games;
  for (int i = 0; i < 64; ++i) games.push_back(random_matrix(&rng, dim, dim));
  std::size_t next = 0;
  for (auto _ : state) {
    auto sol = secgame::solve_matrix_game(games[next++ % games.size()]);
    benchmark::DoNotOptimize(sol.value);
  }
}
BENCHMARK(BM_SolveMatrixGame)->Arg(2)->Arg(4)->Arg(6)->Arg(12);

void BM_SolveOracle(benchmark::State& state) {
  std::mt19937_64 rng(11);
  const auto dim = static_cast<std::size_t>(state.range(0));
  std::vector<std::vector<std::vector<double>>> games;
  for (int i = 0; i < 32; ++i) games.push_back(random_matrix(&rng, dim, dim));
  std::size_t next = 0;
  for (auto _ : state) {
    auto sol = secgame::solve_oracle(games[next++ % games.size()]);
    benchmark::DoNotOptimize(sol.value);
  }
}
BENCHMARK(BM_SolveOracle)->Arg(2)->Arg(4)->Arg(6);

void BM_GenerateCaseStudy(benchmark::State& state) {
  const secgame::Scenario scenario = secgame::builtin_case_study();
  for (auto _ : state) {
    auto graph = secgame::generate_states(scenario);
    benchmark::DoNotOptimize(graph.states.size());
  }
}
BENCHMARK(BM_GenerateCaseStudy);

void BM_SolveCaseStudyEndToEnd(benchmark::State& state) {
  const secgame::Scenario scenario = secgame::builtin_case_study();
  for (auto _ : state) {
    auto graph = secgame::generate_states(scenario);
    auto source = secgame::scenario_matrix_source(scenario, graph);
    auto result =
        secgame::backward_induct(graph, source, scenario.game_params);
    benchmark::DoNotOptimize(result.values.size());
  }
}
BENCHMARK(BM_SolveCaseStudyEndToEnd);

void BM_ShapleyIterateCaseStudy(benchmark::State& state) {
  const secgame::Scenario scenario = secgame::builtin_case_study();
  const secgame::GameGraph graph = secgame::generate_states(scenario);
  const auto source = secgame::scenario_matrix_source(scenario, graph);
  for (auto _ : state) {
    auto result =
        secgame::shapley_iterate(graph, source, scenario.game_params);
    benchmark::DoNotOptimize(result.iterations);
  }
}
BENCHMARK(BM_ShapleyIterateCaseStudy);

}  // namespace

BENCHMARK_MAIN();
