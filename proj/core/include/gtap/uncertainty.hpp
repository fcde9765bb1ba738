#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "gtap/network.hpp"

namespace gtap {

// What a single dilution trial records.
enum class TrialOutput {
  kTrueClassProbability,  // softmax probability of the sampled instance's label
  kCorrectness,           // 1 if the argmax is the label, else 0
};
std::string to_string(TrialOutput output);
TrialOutput parse_trial_output(const std::string& text);

struct MCUEConfig {
  double p = 0.0;  // dropout probability applied to the surviving sub-network
  double q = 0.0;  // fraction of neurons eliminated up front
  std::int64_t k = 500;
  std::uint64_t seed = 0;
  TrialOutput output = TrialOutput::kTrueClassProbability;
  // Average the trial output over the whole batch instead of one random instance.
  bool batch_per_trial = false;
  std::int64_t bootstrap = 1000;
  bool keep_trials = false;

  void validate() const;
  // floor((1 - q) * n): size of the random sub-network before dropout.
  std::size_t retained(std::size_t n) const;
};

struct MCUEResult {
  double mean = 0.0;
  double variance = 0.0;  // unbiased sample variance of the trial outputs
  double std_error = 0.0; // bootstrap standard error of `variance`
  std::vector<double> trials;  // filled when keep_trials is set
};

// Monte-Carlo uncertainty estimate for one (p, q) cell. Each trial draws a
// uniformly random sub-network of retained(n) neurons, drops each survivor
// with probability p and evaluates one uniformly drawn instance. Trials are
// independent counter-based streams, so `threads` never changes the result.
MCUEResult mcue(const MCUEConfig& cfg, const BatchEvaluator& evaluator, int threads = 1);
MCUEResult mcue(const MCUEConfig& cfg, const DenseNetwork& net, const Dataset& data,
                bool include_inputs = false, int threads = 1);

struct UncertaintyGrid {
  std::vector<double> p_values;
  std::vector<double> q_values;
  // Row-major over (p index, q index).
  std::vector<double> variance;
  std::vector<double> std_error;
  std::vector<std::uint64_t> cell_seed;
  std::vector<std::vector<double>> trials;  // per cell when kept
  std::int64_t k = 0;
  std::uint64_t seed = 0;

  std::size_t cell(std::size_t pi, std::size_t qi) const { return pi * q_values.size() + qi; }
  double variance_at(std::size_t pi, std::size_t qi) const { return variance[cell(pi, qi)]; }
};

// Evenly spaced points covering [0, 1] inclusively.
std::vector<double> unit_axis(std::size_t points);

// One mcue call per (p, q) cell of unit_axis(axis_points)^2. The cell seed is
// derived from (seed, p index, q index); cfg.p, cfg.q and cfg.seed are ignored.
UncertaintyGrid band_grid(const BatchEvaluator& evaluator, std::size_t axis_points,
                          const MCUEConfig& cfg, int threads = 1);

// p,q,variance,stderr,k,seed with 17 significant digits.
std::string band_csv(const UncertaintyGrid& grid);

struct BiasSelection {
  double t_star = 0.5;
  double d = 0.5;
  // Set when the whole diagonal is zero; t_star and d then fall back to 0.5.
  bool degenerate = false;
  std::vector<std::pair<double, double>> diagonal;  // (p, variance)
};

// t* = argmax over the diagonal p = q of the variance, ties to the smaller p;
// d = 1 - t*.
BiasSelection select_bias(const UncertaintyGrid& grid);

}  // namespace gtap
