#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "gtap/coalition.hpp"
#include "gtap/game.hpp"
#include "gtap/rng.hpp"

namespace gtap {

// Which member of the semivalue family is being computed.
struct IndexKind {
  enum class Family { kShapley, kBanzhaf, kBiasedBanzhaf };

  Family family = Family::kBanzhaf;
  double t = 0.5;  // inclusion probability; meaningful for kBiasedBanzhaf

  static IndexKind shapley() { return {Family::kShapley, 0.5}; }
  static IndexKind banzhaf() { return {Family::kBanzhaf, 0.5}; }
  static IndexKind biased_banzhaf(double t) { return {Family::kBiasedBanzhaf, t}; }

  // Inclusion probability used by coalition sampling (0.5 for plain Banzhaf).
  double inclusion_probability() const {
    return family == Family::kBiasedBanzhaf ? t : 0.5;
  }

  // "shapley", "banzhaf" or "biased_banzhaf(0.3)".
  std::string to_string() const;
  // Accepts to_string() output plus "biased_banzhaf" with t supplied separately.
  static IndexKind parse(const std::string& text, double default_t = 0.5);

  friend bool operator==(const IndexKind&, const IndexKind&) = default;
};

enum class EstimateMethod { kExact, kMonteCarlo, kSharedSample };
std::string to_string(EstimateMethod method);

enum class EntryStatus : std::uint8_t {
  kEstimated,
  kNotEstimated,  // not requested, or forced absent; value is -inf
  kUndefined,     // shared pool never (or always) contained the player; value is NaN
};

inline constexpr double kNotEstimated = -std::numeric_limits<double>::infinity();

struct PowerIndexEstimate {
  IndexKind kind;
  EstimateMethod method = EstimateMethod::kExact;
  std::vector<double> values;
  std::vector<double> std_error;
  std::vector<std::int64_t> samples_used;
  std::vector<EntryStatus> status;
  std::uint64_t seed = 0;
  std::int64_t samples = 0;
  // Shared-sample estimates reuse one pool, so entries are correlated.
  bool dependent = false;
  // Estimates with different scopes (e.g. "layer:1" vs "layer:2") are not
  // comparable with each other.
  std::string scope = "global";

  static PowerIndexEstimate blank(std::size_t n_players, IndexKind kind,
                                  EstimateMethod method);

  std::size_t num_players() const { return values.size(); }
  bool estimated(std::size_t player) const {
    return status[player] == EntryStatus::kEstimated;
  }
};

// Sampling constraints shared by the Monte-Carlo estimators.
struct SamplingConfig {
  double t = 0.5;
  std::int64_t k = 1000;
  Coalition include;  // forced present; empty bit vector means none
  Coalition exclude;  // forced absent; empty bit vector means none
  std::uint64_t seed = 0;

  // Resizes empty include/exclude sets to n players and checks invariants.
  void normalize(std::size_t n_players);
  void validate(std::size_t n_players) const;
};

// Largest game exact_power_index enumerates.
inline constexpr std::size_t kMaxExactPlayers = 20;

// Exact index by enumerating all 2^n coalitions once.
PowerIndexEstimate exact_power_index(const Game& game, IndexKind kind);

// Draws one coalition under cfg: include_set present, exclude_set absent,
// every other player present with probability cfg.t. `skip`, when set, is
// left out of the draw (absent).
Coalition sample_coalition(const SamplingConfig& cfg, CounterRng& rng,
                           std::size_t skip = static_cast<std::size_t>(-1));

// Per-player Monte-Carlo estimate of the t-biased Banzhaf index. Sample j of
// player i uses its own counter-based stream keyed by (seed, i, j).
PowerIndexEstimate pie_estimate(const Game& game, const SamplingConfig& cfg,
                                std::span<const std::size_t> players,
                                int threads = 1);

// Permutation-sampling Shapley estimate; each permutation updates every player.
PowerIndexEstimate mc_shapley(const Game& game, std::int64_t k, std::uint64_t seed,
                              int threads = 1);
// Constrained variant: include-set players precede everyone, exclude-set
// players never join, and only the remaining players are estimated.
PowerIndexEstimate mc_shapley(const Game& game, const SamplingConfig& cfg,
                              int threads = 1);

// Difference of conditional means over one shared pool of k coalitions.
PowerIndexEstimate shared_sample_estimate(const Game& game, const SamplingConfig& cfg,
                                          int threads = 1);

// {"n_players", "kind", "values", "stderr", "seed", "samples"}. Non-finite
// values are written as null and the per-entry status is carried alongside.
std::string to_json(const PowerIndexEstimate& estimate);
PowerIndexEstimate estimate_from_json(const std::string& text);

}  // namespace gtap
