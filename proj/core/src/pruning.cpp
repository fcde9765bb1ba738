#include "gtap/pruning.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "gtap/error.hpp"
#include "gtap/rng.hpp"

namespace gtap {
namespace {

// Seed of estimation round j. Round 0 reuses the configured seed so that a
// single-round iterated schedule reproduces top_n exactly.
std::uint64_t round_seed(std::uint64_t seed, std::size_t round) {
  return round == 0 ? seed : derive_seed(seed, 0x726f756e64ULL, round);
}

std::int64_t per_round_samples(const PruneConfig& cfg, std::size_t rounds) {
  const std::int64_t floor_k = cfg.estimator == IndexEstimator::kShared ? 2 : 1;
  return std::max(floor_k, cfg.samples / static_cast<std::int64_t>(std::max<std::size_t>(rounds, 1)));
}

std::size_t resolved_step(const PruneConfig& cfg, std::size_t span) {
  if (cfg.step == 0 || cfg.step > span) return span;
  return cfg.step;
}

SamplingConfig sampling_for(const IndexKind& kind, std::int64_t k, std::uint64_t seed,
                            std::size_t n) {
  SamplingConfig s;
  s.t = kind.inclusion_probability();
  s.k = k;
  s.seed = seed;
  s.normalize(n);
  return s;
}

void keep_only(PowerIndexEstimate& est, std::span<const std::size_t> players) {
  std::vector<bool> wanted(est.num_players(), false);
  for (std::size_t p : players) wanted[p] = true;
  for (std::size_t i = 0; i < est.num_players(); ++i) {
    if (wanted[i]) continue;
    est.values[i] = kNotEstimated;
    est.std_error[i] = 0.0;
    est.samples_used[i] = 0;
    est.status[i] = EntryStatus::kNotEstimated;
  }
}

PruneResult full_result(std::size_t n) {
  PruneResult r;
  r.kept = Coalition::grand(n);
  return r;
}

}  // namespace

PowerIndexEstimate estimate_indices(const Game& game, IndexKind kind, IndexEstimator estimator,
                                    const SamplingConfig& cfg_in,
                                    std::span<const std::size_t> players, int threads) {
  const std::size_t n = game.num_players();
  SamplingConfig cfg = cfg_in;
  cfg.t = kind.inclusion_probability();
  cfg.normalize(n);
  cfg.validate(n);

  if (estimator == IndexEstimator::kExact) {
    std::vector<std::size_t> free_players;
    for (std::size_t i = 0; i < n; ++i) {
      if (!cfg.include.contains(i) && !cfg.exclude.contains(i)) free_players.push_back(i);
    }
    if (free_players.empty()) throw InvalidArgument("no free players to estimate");
    const Coalition fixed = cfg.include;
    FunctionGame restricted(
        free_players.size(),
        [&](const Coalition& sub) {
          Coalition c = fixed;
          for (std::size_t s = 0; s < free_players.size(); ++s) {
            if (sub.contains(s)) c.insert(free_players[s]);
          }
          return game.value(c);
        },
        game.label() + "|restricted");
    const PowerIndexEstimate sub = exact_power_index(restricted, kind);
    PowerIndexEstimate out = PowerIndexEstimate::blank(n, kind, EstimateMethod::kExact);
    out.samples = sub.samples;
    for (std::size_t s = 0; s < free_players.size(); ++s) {
      const std::size_t p = free_players[s];
      out.values[p] = sub.values[s];
      out.std_error[p] = 0.0;
      out.samples_used[p] = sub.samples_used[s];
      out.status[p] = EntryStatus::kEstimated;
    }
    for (std::size_t p : players) {
      if (!out.estimated(p)) throw InvalidArgument("requested player is not free");
    }
    keep_only(out, players);
    return out;
  }

  if (kind.family == IndexKind::Family::kShapley) {
    if (estimator == IndexEstimator::kShared) {
      throw InvalidArgument("the shared-sample estimator does not apply to the Shapley value");
    }
    PowerIndexEstimate out = mc_shapley(game, cfg, threads);
    keep_only(out, players);
    return out;
  }
  if (estimator == IndexEstimator::kShared) {
    PowerIndexEstimate out = shared_sample_estimate(game, cfg, threads);
    keep_only(out, players);
    return out;
  }
  PowerIndexEstimate out = pie_estimate(game, cfg, players, threads);
  out.kind = kind;
  return out;
}

std::vector<std::size_t> rank_players(const PowerIndexEstimate& estimate,
                                      std::span<const std::size_t> players) {
  auto key = [&](std::size_t p) {
    const double v = estimate.values[p];
    return std::isnan(v) ? kNotEstimated : v;
  };
  std::vector<std::size_t> order(players.begin(), players.end());
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    const double ka = key(a), kb = key(b);
    return ka != kb ? ka > kb : a < b;
  });
  return order;
}

PruneResult top_n_prune(const Game& game, const PruneConfig& cfg) {
  cfg.validate();
  const std::size_t n = game.num_players();
  const std::size_t r = cfg.target_size(n);
  if (r == n) return full_result(n);

  const IndexKind kind = cfg.resolved_index();
  std::vector<std::size_t> players(n);
  std::iota(players.begin(), players.end(), std::size_t{0});
  PruneResult result;
  result.samples_per_round = cfg.samples;
  result.rounds.push_back(estimate_indices(game, kind, cfg.estimator,
                                           sampling_for(kind, cfg.samples, cfg.seed, n),
                                           players, cfg.threads));
  const auto order = rank_players(result.rounds.back(), players);
  result.kept = Coalition(n);
  for (std::size_t j = 0; j < r; ++j) result.kept.insert(order[j]);
  return result;
}

PruneResult iterated_prune(const Game& game, const PruneConfig& cfg) {
  cfg.validate();
  const std::size_t n = game.num_players();
  const std::size_t r = cfg.target_size(n);
  if (r == n) return full_result(n);

  const IndexKind kind = cfg.resolved_index();
  const std::size_t step = resolved_step(cfg, n - r);
  const std::size_t rounds = (n - r + step - 1) / step;
  PruneResult result;
  result.samples_per_round = per_round_samples(cfg, rounds);

  Coalition exclude(n);
  std::vector<std::size_t> survivors(n);
  std::iota(survivors.begin(), survivors.end(), std::size_t{0});
  for (std::size_t round = 0; survivors.size() > r; ++round) {
    SamplingConfig s = sampling_for(kind, result.samples_per_round, round_seed(cfg.seed, round), n);
    s.exclude = exclude;
    result.rounds.push_back(
        estimate_indices(game, kind, cfg.estimator, s, survivors, cfg.threads));
    auto order = rank_players(result.rounds.back(), survivors);
    const std::size_t drop = std::min(step, survivors.size() - r);
    std::vector<std::size_t> removed(order.end() - static_cast<std::ptrdiff_t>(drop), order.end());
    std::sort(removed.begin(), removed.end());
    for (std::size_t p : removed) exclude.insert(p);
    order.resize(order.size() - drop);
    std::sort(order.begin(), order.end());
    survivors = std::move(order);
    result.changed.push_back(std::move(removed));
  }
  result.kept = Coalition::from_members(n, survivors);
  return result;
}

PruneResult iterated_build(const Game& game, const PruneConfig& cfg) {
  cfg.validate();
  const std::size_t n = game.num_players();
  const std::size_t r = cfg.target_size(n);
  if (r == n) return full_result(n);

  const IndexKind kind = cfg.resolved_index();
  const std::size_t step = resolved_step(cfg, r);
  const std::size_t rounds = (r + step - 1) / step;
  PruneResult result;
  result.samples_per_round = per_round_samples(cfg, rounds);

  Coalition include(n);
  std::vector<std::size_t> candidates(n);
  std::iota(candidates.begin(), candidates.end(), std::size_t{0});
  for (std::size_t round = 0; include.cardinality() < r; ++round) {
    SamplingConfig s = sampling_for(kind, result.samples_per_round, round_seed(cfg.seed, round), n);
    s.include = include;
    result.rounds.push_back(
        estimate_indices(game, kind, cfg.estimator, s, candidates, cfg.threads));
    auto order = rank_players(result.rounds.back(), candidates);
    const std::size_t add = std::min(step, r - include.cardinality());
    std::vector<std::size_t> added(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(add));
    std::sort(added.begin(), added.end());
    for (std::size_t p : added) include.insert(p);
    order.erase(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(add));
    std::sort(order.begin(), order.end());
    candidates = std::move(order);
    result.changed.push_back(std::move(added));
  }
  result.kept = include;
  return result;
}

PruneResult run_schedule(const Game& game, const PruneConfig& cfg) {
  switch (cfg.method) {
    case PruneMethod::kTopN: return top_n_prune(game, cfg);
    case PruneMethod::kIteratedPrune: return iterated_prune(game, cfg);
    case PruneMethod::kIteratedBuild: return iterated_build(game, cfg);
    default:
      throw InvalidArgument("'" + to_string(cfg.method) + "' is not a game-theoretic schedule");
  }
}

}  // namespace gtap
