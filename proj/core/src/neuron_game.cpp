#include <cmath>

#include "gtap/error.hpp"
#include "gtap/pruning.hpp"

namespace gtap {

NeuronGame::NeuronGame(const DenseNetwork& net, const Dataset& batch, bool include_inputs)
    : evaluator_(net, batch, include_inputs) {}

double NeuronGame::value(const Coalition& coalition) const {
  return evaluator_.accuracy(coalition);
}

std::string to_string(PruneMethod method) {
  switch (method) {
    case PruneMethod::kTopN: return "top_n";
    case PruneMethod::kIteratedPrune: return "iterated_prune";
    case PruneMethod::kIteratedBuild: return "iterated_build";
    case PruneMethod::kWmp: return "wmp";
    case PruneMethod::kWgmp: return "wgmp";
    case PruneMethod::kRandom: return "random";
  }
  return "unknown";
}

PruneMethod parse_prune_method(const std::string& text) {
  for (auto m : {PruneMethod::kTopN, PruneMethod::kIteratedPrune, PruneMethod::kIteratedBuild,
                 PruneMethod::kWmp, PruneMethod::kWgmp, PruneMethod::kRandom}) {
    if (to_string(m) == text) return m;
  }
  throw InvalidArgument("unknown pruning method '" + text + "'");
}

bool is_gtap(PruneMethod method) {
  return method == PruneMethod::kTopN || method == PruneMethod::kIteratedPrune ||
         method == PruneMethod::kIteratedBuild;
}

std::string to_string(IndexEstimator estimator) {
  switch (estimator) {
    case IndexEstimator::kPie: return "pie";
    case IndexEstimator::kShared: return "shared";
    case IndexEstimator::kExact: return "exact";
  }
  return "unknown";
}

IndexEstimator parse_index_estimator(const std::string& text) {
  if (text == "pie") return IndexEstimator::kPie;
  if (text == "shared") return IndexEstimator::kShared;
  if (text == "exact") return IndexEstimator::kExact;
  throw InvalidArgument("unknown index estimator '" + text + "' (pie, shared or exact)");
}

std::string to_string(Granularity granularity) {
  return granularity == Granularity::kWeight ? "weight" : "neuron";
}

Granularity parse_granularity(const std::string& text) {
  if (text == "neuron") return Granularity::kNeuron;
  if (text == "weight") return Granularity::kWeight;
  throw InvalidArgument("unknown granularity '" + text + "' (neuron or weight)");
}

void PruneConfig::validate() const {
  if (!(d >= 0.0 && d <= 1.0)) throw InvalidArgument("bias d must lie in [0, 1]");
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw InvalidArgument("retained fraction must lie in (0, 1]");
  }
  if (samples < 1) throw InvalidArgument("sample budget must be at least 1");
  if (index && !(index->t >= 0.0 && index->t <= 1.0)) {
    throw InvalidArgument("index inclusion probability must lie in [0, 1]");
  }
}

IndexKind PruneConfig::resolved_index() const {
  if (index) return *index;
  if (method == PruneMethod::kIteratedPrune) return IndexKind::banzhaf();
  return IndexKind::biased_banzhaf(d);
}

std::size_t PruneConfig::target_size(std::size_t n) const {
  const auto r = static_cast<std::size_t>(std::ceil(fraction * static_cast<double>(n) - 1e-9));
  return std::clamp<std::size_t>(r, 1, n);
}

PowerIndexEstimate layerwise_indices(const NeuronGame& game, std::size_t layer,
                                     const PruneConfig& cfg) {
  cfg.validate();
  const NeuronMask& universe = game.universe();
  if (!universe.is_prunable(layer)) {
    throw InvalidArgument("layer " + std::to_string(layer) + " has no prunable neurons");
  }
  const std::vector<std::size_t> players = universe.ids_in_layer(layer);
  const std::size_t n = universe.size();
  const IndexKind kind = cfg.resolved_index();

  SamplingConfig sampling;
  sampling.k = cfg.samples;
  sampling.seed = cfg.seed;
  sampling.t = kind.inclusion_probability();
  sampling.include = Coalition::grand(n);
  for (std::size_t id : players) sampling.include.erase(id);
  sampling.exclude = Coalition(n);

  PowerIndexEstimate est =
      estimate_indices(game, kind, cfg.estimator, sampling, players, cfg.threads);
  est.scope = "layer:" + std::to_string(layer);
  return est;
}

}  // namespace gtap
