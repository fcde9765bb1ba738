#include <benchmark/benchmark.h>

#include <numeric>

#include "gtap/game.hpp"
#include "gtap/power_index.hpp"

namespace {

gtap::WeightedVotingGame voting_game(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = static_cast<double>(1 + (i * 7) % 10);
  const double total = std::accumulate(w.begin(), w.end(), 0.0);
  return gtap::WeightedVotingGame(total / 2 + 1, w);
}

void BM_ExactBanzhaf(benchmark::State& state) {
  const auto game = voting_game(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gtap::exact_power_index(game, gtap::IndexKind::banzhaf()));
  }
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ExactBanzhaf)->DenseRange(8, 16, 4);

void BM_ExactShapley(benchmark::State& state) {
  const auto game = voting_game(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    benchmark::DoNotOptimize(gtap::exact_power_index(game, gtap::IndexKind::shapley()));
  }
}
BENCHMARK(BM_ExactShapley)->DenseRange(8, 16, 4);

void BM_PieEstimate(benchmark::State& state) {
  const auto game = voting_game(32);
  gtap::SamplingConfig cfg;
  cfg.t = 0.3;
  cfg.k = state.range(0);
  std::vector<std::size_t> players(32);
  std::iota(players.begin(), players.end(), std::size_t{0});
  for (auto _ : state) {
    benchmark::DoNotOptimize(gtap::pie_estimate(game, cfg, players));
  }
  state.SetItemsProcessed(state.iterations() * 32 * state.range(0));
}
BENCHMARK(BM_PieEstimate)->Arg(1000)->Arg(10000);

void BM_McShapley(benchmark::State& state) {
  const auto game = voting_game(32);
  for (auto _ : state) {
    benchmark::DoNotOptimize(gtap::mc_shapley(game, state.range(0), 1));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_McShapley)->Arg(1000)->Arg(10000);

}  // namespace
