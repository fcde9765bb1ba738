#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gtap/dataset.hpp"
#include "gtap/game.hpp"
#include "gtap/network.hpp"
#include "gtap/power_index.hpp"
#include "gtap/training.hpp"

namespace gtap {

// Neurons as players: v(C) is the accuracy on a fixed evaluation batch of the
// network with every neuron outside C masked. The network and batch must
// outlive the game.
class NeuronGame final : public Game {
 public:
  NeuronGame(const DenseNetwork& net, const Dataset& batch, bool include_inputs = false);

  std::size_t num_players() const override { return evaluator_.num_neurons(); }
  double value(const Coalition& coalition) const override;
  std::string label() const override { return "neuron_accuracy"; }

  const BatchEvaluator& evaluator() const { return evaluator_; }
  const NeuronMask& universe() const { return evaluator_.universe(); }
  const DenseNetwork& network() const { return evaluator_.network(); }

 private:
  BatchEvaluator evaluator_;
};

enum class PruneMethod { kTopN, kIteratedPrune, kIteratedBuild, kWmp, kWgmp, kRandom };
std::string to_string(PruneMethod method);
PruneMethod parse_prune_method(const std::string& text);
bool is_gtap(PruneMethod method);

// How power indices are obtained inside a schedule.
enum class IndexEstimator { kPie, kShared, kExact };
std::string to_string(IndexEstimator estimator);
IndexEstimator parse_index_estimator(const std::string& text);

enum class Granularity { kNeuron, kWeight };
std::string to_string(Granularity granularity);
Granularity parse_granularity(const std::string& text);

struct PruneConfig {
  PruneMethod method = PruneMethod::kTopN;
  // Unset: biased Banzhaf at d for top_n and iterated_build, plain Banzhaf
  // for iterated_prune.
  std::optional<IndexKind> index;
  double d = 0.5;
  // Target retained fraction r / n in (0, 1].
  double fraction = 0.5;
  // Neurons removed (added) per iteration; 0 means a single round.
  std::size_t step = 1;
  // Per-player sample budget, split evenly across rounds of the iterated schedules.
  std::int64_t samples = 1000;
  IndexEstimator estimator = IndexEstimator::kPie;
  Granularity granularity = Granularity::kNeuron;  // baselines only
  std::uint64_t seed = 0;
  int threads = 1;

  void validate() const;
  IndexKind resolved_index() const;
  // r = ceil(fraction * n).
  std::size_t target_size(std::size_t n) const;
};

// Kept set plus the per-round trace of an iterated schedule.
struct PruneResult {
  Coalition kept;
  std::vector<PowerIndexEstimate> rounds;
  // Players removed (iterated_prune) or added (iterated_build) in each round.
  std::vector<std::vector<std::size_t>> changed;
  std::int64_t samples_per_round = 0;
};

// Estimates indices for `players` under the given constraints. Exact indices
// enumerate the free players with include-set members held present.
PowerIndexEstimate estimate_indices(const Game& game, IndexKind kind, IndexEstimator estimator,
                                    const SamplingConfig& cfg,
                                    std::span<const std::size_t> players, int threads = 1);

// Descending by value, ties to the lower id; NaN and -inf sort last.
std::vector<std::size_t> rank_players(const PowerIndexEstimate& estimate,
                                      std::span<const std::size_t> players);

PruneResult top_n_prune(const Game& game, const PruneConfig& cfg);
PruneResult iterated_prune(const Game& game, const PruneConfig& cfg);
PruneResult iterated_build(const Game& game, const PruneConfig& cfg);
// Dispatches on cfg.method; GTAP methods only.
PruneResult run_schedule(const Game& game, const PruneConfig& cfg);

// Indices for the prunable neurons of one activation layer, with every other
// prunable neuron held present. The result's scope is "layer:<layer>".
PowerIndexEstimate layerwise_indices(const NeuronGame& game, std::size_t layer,
                                     const PruneConfig& cfg);

// Output of a magnitude or random baseline.
struct BaselineResult {
  Granularity granularity = Granularity::kNeuron;
  NeuronMask mask;      // neuron granularity; all kept for weight granularity
  DenseNetwork network; // weight granularity: pruned weights zeroed
  std::size_t kept_weights = 0;
  std::size_t total_weights = 0;
};

// wmp ranks by |w|, wgmp by |w * dL/dw| over `data`, random draws a seeded
// uniform kept set. Neuron granularity keeps ceil(fraction * n) neurons;
// weight granularity keeps ceil(fraction * W) weights (biases untouched).
BaselineResult baseline_prune(const DenseNetwork& net, const Dataset& data,
                              const PruneConfig& cfg, bool include_inputs = false);

// Lowest-scored entries are dropped first; ties keep the lower index.
std::vector<std::size_t> top_scores(std::span<const double> scores, std::size_t keep);

struct CurveRow {
  std::string method;
  std::string index_kind;
  double d = 0.0;
  double fraction = 1.0;
  double accuracy = 0.0;
  std::uint64_t seed = 0;
  std::int64_t k = 0;
  double wall_ms = 0.0;

  friend bool operator==(const CurveRow&, const CurveRow&) = default;
};

struct CompressionCurve {
  std::vector<CurveRow> rows;

  friend bool operator==(const CompressionCurve&, const CompressionCurve&) = default;
};

struct CurveMethod {
  PruneConfig config;  // fraction and seed are overwritten per row
  // Column label; empty derives one from the method and granularity.
  std::string label;
};

struct CurveOptions {
  std::vector<double> fractions;
  std::vector<std::uint64_t> seeds;
  bool include_inputs = false;
  // Record wall-clock milliseconds per row; off keeps the CSV reproducible.
  bool timing = false;
  int threads = 1;
};

// One row per (method, fraction, seed), fractions in decreasing order.
// Indices and gradients use eval_batch; accuracy is measured on test_set.
CompressionCurve compression_curve(const DenseNetwork& net, const Dataset& eval_batch,
                                   const Dataset& test_set,
                                   const std::vector<CurveMethod>& methods,
                                   const CurveOptions& options);

std::string method_label(const PruneConfig& cfg);
// method,index_kind,d,fraction,accuracy,seed,k,wall_ms
std::string curve_csv(const CompressionCurve& curve);

}  // namespace gtap
