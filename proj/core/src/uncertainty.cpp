#include "gtap/uncertainty.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>

#include "gtap/error.hpp"
#include "gtap/parallel.hpp"
#include "gtap/rng.hpp"

namespace gtap {
namespace {

constexpr std::size_t kTrialsPerTask = 64;

// Unbiased sample variance; exactly zero when every value is identical.
double sample_variance(const std::vector<double>& x, double* mean_out = nullptr) {
  const double n = static_cast<double>(x.size());
  double sum = 0.0;
  for (double v : x) sum += v;
  const double mean = sum / n;
  if (mean_out != nullptr) *mean_out = mean;
  const auto [lo, hi] = std::minmax_element(x.begin(), x.end());
  if (*lo == *hi) return 0.0;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0);
}

double trial_value(const MCUEConfig& cfg, const BatchEvaluator& ev, std::size_t instance,
                   const Coalition& kept) {
  if (cfg.output == TrialOutput::kCorrectness) return ev.correct(instance, kept) ? 1.0 : 0.0;
  return ev.true_class_probability(instance, kept);
}

}  // namespace

std::string to_string(TrialOutput output) {
  return output == TrialOutput::kCorrectness ? "correctness" : "true_class_prob";
}

TrialOutput parse_trial_output(const std::string& text) {
  if (text == "true_class_prob") return TrialOutput::kTrueClassProbability;
  if (text == "correctness") return TrialOutput::kCorrectness;
  throw InvalidArgument("unknown trial output '" + text +
                        "' (expected true_class_prob or correctness)");
}

void MCUEConfig::validate() const {
  if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument("mcue: p must lie in [0, 1]");
  if (!(q >= 0.0 && q <= 1.0)) throw InvalidArgument("mcue: q must lie in [0, 1]");
  if (k < 2) throw InvalidArgument("mcue: k must be at least 2");
  if (bootstrap != 0 && bootstrap < 2) {
    throw InvalidArgument("mcue: bootstrap must be 0 (disabled) or at least 2");
  }
}

std::size_t MCUEConfig::retained(std::size_t n) const {
  return static_cast<std::size_t>(std::floor((1.0 - q) * static_cast<double>(n) + 1e-9));
}

MCUEResult mcue(const MCUEConfig& cfg, const BatchEvaluator& evaluator, int threads) {
  cfg.validate();
  const std::size_t n = evaluator.num_neurons();
  if (n == 0) throw InvalidArgument("mcue: the prunable universe is empty");
  const std::size_t m = std::min(n, cfg.retained(n));
  const std::size_t k = static_cast<std::size_t>(cfg.k);
  const std::uint64_t key = domain_key(cfg.seed, RngDomain::kMcue);

  std::vector<double> t(k);
  const std::size_t tasks = (k + kTrialsPerTask - 1) / kTrialsPerTask;
  parallel_for(tasks, threads, [&](std::size_t task) {
    std::vector<std::size_t> order(n);
    Coalition kept(n);
    const std::size_t end = std::min(k, (task + 1) * kTrialsPerTask);
    for (std::size_t trial = task * kTrialsPerTask; trial < end; ++trial) {
      CounterRng rng(key, static_cast<std::uint32_t>(trial),
                     static_cast<std::uint32_t>(trial >> 32));
      std::iota(order.begin(), order.end(), std::size_t{0});
      kept = Coalition(n);
      for (std::size_t j = 0; j < m; ++j) {
        const std::size_t pick = j + static_cast<std::size_t>(rng.below(n - j));
        std::swap(order[j], order[pick]);
      }
      for (std::size_t j = 0; j < m; ++j) {
        if (!rng.bernoulli(cfg.p)) kept.insert(order[j]);
      }
      if (cfg.batch_per_trial) {
        double total = 0.0;
        for (std::size_t i = 0; i < evaluator.batch_size(); ++i) {
          total += trial_value(cfg, evaluator, i, kept);
        }
        t[trial] = total / static_cast<double>(evaluator.batch_size());
      } else {
        const auto instance = static_cast<std::size_t>(rng.below(evaluator.batch_size()));
        t[trial] = trial_value(cfg, evaluator, instance, kept);
      }
    }
  });

  MCUEResult result;
  result.variance = sample_variance(t, &result.mean);
  if (cfg.bootstrap > 0 && result.variance > 0.0) {
    const std::size_t b_count = static_cast<std::size_t>(cfg.bootstrap);
    const std::uint64_t bkey = domain_key(cfg.seed, RngDomain::kBootstrap);
    std::vector<double> boot(b_count);
    parallel_for(b_count, threads, [&](std::size_t b) {
      CounterRng rng(bkey, static_cast<std::uint32_t>(b), 0);
      std::vector<double> resample(k);
      for (double& v : resample) v = t[static_cast<std::size_t>(rng.below(k))];
      boot[b] = sample_variance(resample);
    });
    result.std_error = std::sqrt(sample_variance(boot));
  }
  if (cfg.keep_trials) result.trials = std::move(t);
  return result;
}

MCUEResult mcue(const MCUEConfig& cfg, const DenseNetwork& net, const Dataset& data,
                bool include_inputs, int threads) {
  if (data.empty()) throw InvalidArgument("mcue: dataset is empty");
  const BatchEvaluator evaluator(net, data, include_inputs);
  return mcue(cfg, evaluator, threads);
}

std::vector<double> unit_axis(std::size_t points) {
  if (points < 2) throw InvalidArgument("a grid axis needs at least 2 points");
  std::vector<double> axis(points);
  for (std::size_t i = 0; i < points; ++i) {
    axis[i] = static_cast<double>(i) / static_cast<double>(points - 1);
  }
  return axis;
}

UncertaintyGrid band_grid(const BatchEvaluator& evaluator, std::size_t axis_points,
                          const MCUEConfig& cfg, int threads) {
  UncertaintyGrid grid;
  grid.p_values = unit_axis(axis_points);
  grid.q_values = grid.p_values;
  grid.k = cfg.k;
  grid.seed = cfg.seed;
  const std::size_t cells = axis_points * axis_points;
  grid.variance.resize(cells);
  grid.std_error.resize(cells);
  grid.cell_seed.resize(cells);
  if (cfg.keep_trials) grid.trials.resize(cells);
  for (std::size_t pi = 0; pi < axis_points; ++pi) {
    for (std::size_t qi = 0; qi < axis_points; ++qi) {
      grid.cell_seed[grid.cell(pi, qi)] = derive_seed(cfg.seed, pi + 1, qi + 1);
    }
  }
  parallel_for(cells, threads, [&](std::size_t c) {
    MCUEConfig cell_cfg = cfg;
    cell_cfg.p = grid.p_values[c / axis_points];
    cell_cfg.q = grid.q_values[c % axis_points];
    cell_cfg.seed = grid.cell_seed[c];
    MCUEResult r = mcue(cell_cfg, evaluator, 1);
    grid.variance[c] = r.variance;
    grid.std_error[c] = r.std_error;
    if (cfg.keep_trials) grid.trials[c] = std::move(r.trials);
  });
  return grid;
}

std::string band_csv(const UncertaintyGrid& grid) {
  std::string out = "p,q,variance,stderr,k,seed\n";
  char line[256];
  for (std::size_t pi = 0; pi < grid.p_values.size(); ++pi) {
    for (std::size_t qi = 0; qi < grid.q_values.size(); ++qi) {
      const std::size_t c = grid.cell(pi, qi);
      std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g,%lld,%llu\n", grid.p_values[pi],
                    grid.q_values[qi], grid.variance[c], grid.std_error[c],
                    static_cast<long long>(grid.k),
                    static_cast<unsigned long long>(grid.cell_seed[c]));
      out += line;
    }
  }
  return out;
}

BiasSelection select_bias(const UncertaintyGrid& grid) {
  BiasSelection sel;
  for (std::size_t pi = 0; pi < grid.p_values.size(); ++pi) {
    const auto it = std::find(grid.q_values.begin(), grid.q_values.end(), grid.p_values[pi]);
    if (it == grid.q_values.end()) continue;
    const auto qi = static_cast<std::size_t>(it - grid.q_values.begin());
    sel.diagonal.emplace_back(grid.p_values[pi], grid.variance_at(pi, qi));
  }
  if (sel.diagonal.empty()) throw InvalidArgument("grid has no diagonal (p = q) cells");
  std::sort(sel.diagonal.begin(), sel.diagonal.end());

  std::size_t best = 0;
  for (std::size_t i = 1; i < sel.diagonal.size(); ++i) {
    if (sel.diagonal[i].second > sel.diagonal[best].second) best = i;
  }
  if (sel.diagonal[best].second == 0.0) {
    sel.degenerate = true;
    sel.t_star = 0.5;
    sel.d = 0.5;
    return sel;
  }
  sel.t_star = sel.diagonal[best].first;
  sel.d = 1.0 - sel.t_star;
  return sel;
}

}  // namespace gtap
