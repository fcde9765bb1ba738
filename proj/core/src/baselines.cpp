#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtap/error.hpp"
#include "gtap/pruning.hpp"
#include "gtap/rng.hpp"

namespace gtap {
namespace {

std::size_t keep_count(double fraction, std::size_t total) {
  const auto k = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(total) - 1e-9));
  return std::clamp<std::size_t>(k, 1, total);
}

// Seeded uniform subset of `keep` out of `total`, returned ascending.
std::vector<std::size_t> random_subset(std::size_t total, std::size_t keep, std::uint64_t seed,
                                       Granularity granularity) {
  std::vector<std::size_t> ids(total);
  std::iota(ids.begin(), ids.end(), std::size_t{0});
  CounterRng rng(domain_key(seed, RngDomain::kBaseline), static_cast<std::uint32_t>(granularity),
                 0);
  for (std::size_t i = 0; i < keep; ++i) {
    std::swap(ids[i], ids[i + static_cast<std::size_t>(rng.below(total - i))]);
  }
  ids.resize(keep);
  std::sort(ids.begin(), ids.end());
  return ids;
}

}  // namespace

std::vector<std::size_t> top_scores(std::span<const double> scores, std::size_t keep) {
  if (keep > scores.size()) throw InvalidArgument("cannot keep more entries than exist");
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  order.resize(keep);
  std::sort(order.begin(), order.end());
  return order;
}

BaselineResult baseline_prune(const DenseNetwork& net, const Dataset& data,
                              const PruneConfig& cfg, bool include_inputs) {
  if (!(cfg.fraction > 0.0 && cfg.fraction <= 1.0)) {
    throw InvalidArgument("retained fraction must lie in (0, 1]");
  }
  if (is_gtap(cfg.method)) {
    throw InvalidArgument("'" + to_string(cfg.method) + "' is not a baseline method");
  }
  BaselineResult out;
  out.granularity = cfg.granularity;
  out.mask = NeuronMask::full(net.spec(), include_inputs);
  out.network = net;
  out.total_weights = net.num_weights();
  out.kept_weights = out.total_weights;

  std::vector<std::size_t> kept;
  const std::size_t total =
      cfg.granularity == Granularity::kNeuron ? out.mask.size() : out.total_weights;
  const std::size_t keep = keep_count(cfg.fraction, total);
  if (cfg.method == PruneMethod::kRandom) {
    kept = random_subset(total, keep, cfg.seed, cfg.granularity);
  } else {
    const SaliencyKind kind =
        cfg.method == PruneMethod::kWmp ? SaliencyKind::kAbsWeight : SaliencyKind::kWeightTimesGrad;
    const SaliencyScores scores = saliency(net, data, kind, include_inputs);
    kept = top_scores(cfg.granularity == Granularity::kNeuron ? scores.per_neuron
                                                               : scores.per_weight,
                      keep);
  }

  if (cfg.granularity == Granularity::kNeuron) {
    out.mask.set_kept_set(Coalition::from_members(out.mask.size(), kept));
    return out;
  }
  std::vector<bool> keep_flag(total, false);
  for (std::size_t i : kept) keep_flag[i] = true;
  std::size_t flat = 0;
  for (std::size_t l = 0; l < out.network.num_weight_layers(); ++l) {
    for (double& w : out.network.weights(l)) {
      if (!keep_flag[flat++]) w = 0.0;
    }
  }
  out.kept_weights = keep;
  return out;
}

}  // namespace gtap
