#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>

#include "gtap/error.hpp"
#include "gtap/pruning.hpp"

namespace gtap {
namespace {

std::string score_label(const PruneConfig& cfg) {
  switch (cfg.method) {
    case PruneMethod::kWmp: return to_string(SaliencyKind::kAbsWeight);
    case PruneMethod::kWgmp: return to_string(SaliencyKind::kWeightTimesGrad);
    case PruneMethod::kRandom: return "uniform";
    default: return cfg.resolved_index().to_string();
  }
}

}  // namespace

std::string method_label(const PruneConfig& cfg) {
  std::string label = to_string(cfg.method);
  if (!is_gtap(cfg.method) && cfg.granularity == Granularity::kWeight) label += "-weights";
  return label;
}

CompressionCurve compression_curve(const DenseNetwork& net, const Dataset& eval_batch,
                                   const Dataset& test_set,
                                   const std::vector<CurveMethod>& methods,
                                   const CurveOptions& options) {
  if (options.fractions.empty()) throw InvalidArgument("curve needs at least one fraction");
  if (options.seeds.empty()) throw InvalidArgument("curve needs at least one seed");
  for (double f : options.fractions) {
    if (!(f > 0.0 && f <= 1.0)) throw InvalidArgument("curve fractions must lie in (0, 1]");
  }
  std::vector<double> fractions = options.fractions;
  std::sort(fractions.begin(), fractions.end(), std::greater<>());

  const NeuronGame game(net, eval_batch, options.include_inputs);
  const BatchEvaluator test_eval(net, test_set, options.include_inputs);

  CompressionCurve curve;
  for (const CurveMethod& m : methods) {
    for (double fraction : fractions) {
      for (std::uint64_t seed : options.seeds) {
        PruneConfig cfg = m.config;
        cfg.fraction = fraction;
        cfg.seed = seed;
        cfg.threads = options.threads;
        cfg.validate();

        const auto start = std::chrono::steady_clock::now();
        CurveRow row;
        if (is_gtap(cfg.method)) {
          const PruneResult result = run_schedule(game, cfg);
          row.accuracy = test_eval.accuracy(result.kept);
          row.k = cfg.samples;
        } else {
          const BaselineResult result = baseline_prune(net, eval_batch, cfg, options.include_inputs);
          if (cfg.granularity == Granularity::kNeuron) {
            row.accuracy = test_eval.accuracy(result.mask.kept_set());
          } else {
            const BatchEvaluator pruned_eval(result.network, test_set, options.include_inputs);
            row.accuracy = pruned_eval.accuracy(pruned_eval.universe().kept_set());
          }
        }
        if (options.timing) {
          row.wall_ms = std::chrono::duration<double, std::milli>(
                            std::chrono::steady_clock::now() - start)
                            .count();
        }
        row.method = m.label.empty() ? method_label(cfg) : m.label;
        row.index_kind = score_label(cfg);
        row.d = cfg.d;
        row.fraction = fraction;
        row.seed = seed;
        curve.rows.push_back(std::move(row));
      }
    }
  }
  return curve;
}

std::string curve_csv(const CompressionCurve& curve) {
  std::string out = "method,index_kind,d,fraction,accuracy,seed,k,wall_ms\n";
  char line[512];
  for (const CurveRow& row : curve.rows) {
    std::snprintf(line, sizeof line, "%s,%s,%.17g,%.17g,%.17g,%llu,%lld,%.17g\n",
                  row.method.c_str(), row.index_kind.c_str(), row.d, row.fraction, row.accuracy,
                  static_cast<unsigned long long>(row.seed), static_cast<long long>(row.k),
                  row.wall_ms);
    out += line;
  }
  return out;
}

}  // namespace gtap
