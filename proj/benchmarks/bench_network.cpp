#include <benchmark/benchmark.h>

#include "gtap/dataset.hpp"
#include "gtap/network.hpp"
#include "gtap/pruning.hpp"
#include "gtap/rng.hpp"

namespace {

// An MNIST-shaped network and a random batch; timings do not depend on the
// parameter values.
struct Fixture {
  gtap::DenseNetwork net = gtap::DenseNetwork::glorot(gtap::NetworkSpec{{784, 64, 32, 10}}, 1);
  gtap::Dataset batch;

  explicit Fixture(std::size_t rows) {
    batch.n_features = 784;
    batch.n_classes = 10;
    gtap::CounterRng rng(7, 0, 0);
    for (std::size_t i = 0; i < rows * 784; ++i) batch.features.push_back(rng.uniform());
    for (std::size_t i = 0; i < rows; ++i) {
      batch.labels.push_back(static_cast<std::int32_t>(rng.below(10)));
    }
  }
};

gtap::Coalition half_coalition(std::size_t n) {
  gtap::Coalition c(n);
  for (std::size_t i = 0; i < n; i += 2) c.insert(i);
  return c;
}

// One evaluation of the neuron game: the unit cost of every index estimate.
void BM_NeuronGameValue(benchmark::State& state) {
  const Fixture f(static_cast<std::size_t>(state.range(0)));
  const gtap::NeuronGame game(f.net, f.batch);
  const auto c = half_coalition(game.num_players());
  for (auto _ : state) benchmark::DoNotOptimize(game.value(c));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_NeuronGameValue)->Arg(128)->Arg(512);

void BM_ForwardMasked(benchmark::State& state) {
  const Fixture f(1);
  auto mask = gtap::NeuronMask::full(f.net.spec());
  mask.set_kept_set(half_coalition(mask.size()));
  for (auto _ : state) benchmark::DoNotOptimize(gtap::forward_masked(f.net, f.batch.row(0), mask));
}
BENCHMARK(BM_ForwardMasked);

}  // namespace
