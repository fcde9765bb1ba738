#include "gtap/power_index.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>

#include "gtap/error.hpp"
#include "gtap/parallel.hpp"

namespace gtap {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Streaming mean/variance; merge() is Chan et al.'s pairwise update, applied
// in a fixed order so block results do not depend on scheduling.
struct RunningStats {
  std::int64_t count = 0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    ++count;
    const double delta = x - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (x - mean);
  }

  void merge(const RunningStats& other) {
    if (other.count == 0) return;
    if (count == 0) {
      *this = other;
      return;
    }
    const double total = static_cast<double>(count + other.count);
    const double delta = other.mean - mean;
    mean += delta * static_cast<double>(other.count) / total;
    m2 += other.m2 + delta * delta * static_cast<double>(count) *
                         static_cast<double>(other.count) / total;
    count += other.count;
  }

  double sample_variance() const {
    return count > 1 ? m2 / static_cast<double>(count - 1) : 0.0;
  }
  double standard_error() const {
    return count > 1 ? std::sqrt(sample_variance() / static_cast<double>(count)) : 0.0;
  }
};

void check_t(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw InvalidArgument("inclusion probability outside [0,1]");
}

std::uint32_t stream_id(std::int64_t value) {
  if (value < 0 || value > 0xFFFFFFFFll) {
    throw InvalidArgument("sample or player index exceeds the 32-bit stream space");
  }
  return static_cast<std::uint32_t>(value);
}

}  // namespace

std::string IndexKind::to_string() const {
  switch (family) {
    case Family::kShapley:
      return "shapley";
    case Family::kBanzhaf:
      return "banzhaf";
    case Family::kBiasedBanzhaf: {
      // Shortest representation that parses back to the same double.
      char buf[32];
      const auto res = std::to_chars(buf, buf + sizeof buf, t);
      return "biased_banzhaf(" + std::string(buf, res.ptr) + ")";
    }
  }
  return "unknown";
}

IndexKind IndexKind::parse(const std::string& text, double default_t) {
  if (text == "shapley") return shapley();
  if (text == "banzhaf") return banzhaf();
  if (text == "biased_banzhaf") {
    check_t(default_t);
    return biased_banzhaf(default_t);
  }
  const std::string prefix = "biased_banzhaf(";
  if (text.rfind(prefix, 0) == 0 && text.size() > prefix.size() + 1 && text.back() == ')') {
    const std::string number = text.substr(prefix.size(), text.size() - prefix.size() - 1);
    char* end = nullptr;
    const double t = std::strtod(number.c_str(), &end);
    if (end != number.c_str() + number.size()) {
      throw InvalidArgument("malformed index kind '" + text + "'");
    }
    check_t(t);
    return biased_banzhaf(t);
  }
  throw InvalidArgument("unknown index kind '" + text + "'");
}

std::string to_string(EstimateMethod method) {
  switch (method) {
    case EstimateMethod::kExact:
      return "exact";
    case EstimateMethod::kMonteCarlo:
      return "monte_carlo";
    case EstimateMethod::kSharedSample:
      return "shared_sample";
  }
  return "unknown";
}

PowerIndexEstimate PowerIndexEstimate::blank(std::size_t n_players, IndexKind kind,
                                             EstimateMethod method) {
  PowerIndexEstimate e;
  e.kind = kind;
  e.method = method;
  e.values.assign(n_players, kNotEstimated);
  e.std_error.assign(n_players, 0.0);
  e.samples_used.assign(n_players, 0);
  e.status.assign(n_players, EntryStatus::kNotEstimated);
  return e;
}

void SamplingConfig::normalize(std::size_t n_players) {
  if (include.size() == 0) include = Coalition(n_players);
  if (exclude.size() == 0) exclude = Coalition(n_players);
  validate(n_players);
}

void SamplingConfig::validate(std::size_t n_players) const {
  check_t(t);
  if (k < 1) throw InvalidArgument("sample count k must be at least 1");
  if (include.size() != n_players || exclude.size() != n_players) {
    throw InvalidArgument("include/exclude sets must cover every player");
  }
  if (!include.disjoint(exclude)) {
    throw InvalidArgument("include and exclude sets overlap");
  }
}

PowerIndexEstimate exact_power_index(const Game& game, IndexKind kind) {
  const std::size_t n = game.num_players();
  if (n == 0) throw InvalidArgument("game has no players");
  if (n > kMaxExactPlayers) {
    throw InvalidArgument("exact enumeration is limited to " +
                          std::to_string(kMaxExactPlayers) + " players");
  }
  check_t(kind.t);

  const std::uint64_t n_subsets = std::uint64_t{1} << n;
  std::vector<double> table(n_subsets);
  for (std::uint64_t bits = 0; bits < n_subsets; ++bits) {
    table[bits] = game.value(Coalition::from_bits(n, bits));
  }

  // weight[s]: probability mass of one particular coalition of size s drawn
  // from the other n-1 players.
  std::vector<double> weight(n);
  switch (kind.family) {
    case IndexKind::Family::kShapley:
      weight[0] = 1.0 / static_cast<double>(n);
      for (std::size_t s = 0; s + 1 < n; ++s) {
        weight[s + 1] = weight[s] * static_cast<double>(s + 1) /
                        static_cast<double>(n - 1 - s);
      }
      break;
    case IndexKind::Family::kBanzhaf:
      for (std::size_t s = 0; s < n; ++s) {
        weight[s] = std::ldexp(1.0, -static_cast<int>(n - 1));
      }
      break;
    case IndexKind::Family::kBiasedBanzhaf:
      for (std::size_t s = 0; s < n; ++s) {
        weight[s] = std::pow(kind.t, static_cast<double>(s)) *
                    std::pow(1.0 - kind.t, static_cast<double>(n - 1 - s));
      }
      break;
  }

  PowerIndexEstimate out = PowerIndexEstimate::blank(n, kind, EstimateMethod::kExact);
  out.samples = static_cast<std::int64_t>(n_subsets);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t player_bit = std::uint64_t{1} << i;
    double total = 0.0;
    for (std::uint64_t bits = 0; bits < n_subsets; ++bits) {
      if (bits & player_bit) continue;
      const auto size = static_cast<std::size_t>(std::popcount(bits));
      total += weight[size] * (table[bits | player_bit] - table[bits]);
    }
    out.values[i] = total;
    out.std_error[i] = 0.0;
    out.samples_used[i] = static_cast<std::int64_t>(n_subsets / 2);
    out.status[i] = EntryStatus::kEstimated;
  }
  return out;
}

Coalition sample_coalition(const SamplingConfig& cfg, CounterRng& rng, std::size_t skip) {
  const std::size_t n = cfg.include.size();
  Coalition c = cfg.include;
  // One uniform is consumed per player, forced or not, so player x always
  // reads the x-th draw of its stream.
  for (std::size_t x = 0; x < n; ++x) {
    const bool drawn = rng.bernoulli(cfg.t);
    if (x == skip || cfg.exclude.contains(x) || cfg.include.contains(x)) continue;
    if (drawn) c.insert(x);
  }
  if (skip < n) c.erase(skip);
  return c;
}

PowerIndexEstimate pie_estimate(const Game& game, const SamplingConfig& cfg_in,
                                std::span<const std::size_t> players, int threads) {
  const std::size_t n = game.num_players();
  SamplingConfig cfg = cfg_in;
  cfg.normalize(n);
  for (std::size_t p : players) {
    if (p >= n) throw InvalidArgument("requested player out of range");
    if (cfg.exclude.contains(p)) {
      throw InvalidArgument("player " + std::to_string(p) + " is in the exclude set");
    }
  }

  IndexKind kind = cfg.t == 0.5 ? IndexKind::banzhaf() : IndexKind::biased_banzhaf(cfg.t);
  PowerIndexEstimate out = PowerIndexEstimate::blank(n, kind, EstimateMethod::kMonteCarlo);
  out.seed = cfg.seed;
  out.samples = cfg.k;

  const std::uint64_t key = domain_key(cfg.seed, RngDomain::kCoalition);
  std::vector<RunningStats> stats(players.size());
  parallel_for(players.size(), threads, [&](std::size_t slot) {
    const std::size_t player = players[slot];
    RunningStats acc;
    for (std::int64_t j = 0; j < cfg.k; ++j) {
      CounterRng rng(key, stream_id(static_cast<std::int64_t>(player)), stream_id(j));
      Coalition c = sample_coalition(cfg, rng, player);
      const double without = game.value(c);
      c.insert(player);
      const double with = game.value(c);
      acc.add(with - without);
    }
    stats[slot] = acc;
  });

  for (std::size_t slot = 0; slot < players.size(); ++slot) {
    const std::size_t p = players[slot];
    out.values[p] = stats[slot].mean;
    out.std_error[p] = stats[slot].standard_error();
    out.samples_used[p] = stats[slot].count;
    out.status[p] = EntryStatus::kEstimated;
  }
  return out;
}

PowerIndexEstimate mc_shapley(const Game& game, std::int64_t k, std::uint64_t seed,
                              int threads) {
  SamplingConfig cfg;
  cfg.k = k;
  cfg.seed = seed;
  return mc_shapley(game, cfg, threads);
}

PowerIndexEstimate mc_shapley(const Game& game, const SamplingConfig& cfg_in, int threads) {
  const std::size_t n = game.num_players();
  SamplingConfig cfg = cfg_in;
  cfg.normalize(n);

  std::vector<std::size_t> free_players;
  for (std::size_t i = 0; i < n; ++i) {
    if (!cfg.include.contains(i) && !cfg.exclude.contains(i)) free_players.push_back(i);
  }

  PowerIndexEstimate out =
      PowerIndexEstimate::blank(n, IndexKind::shapley(), EstimateMethod::kMonteCarlo);
  out.seed = cfg.seed;
  out.samples = cfg.k;
  if (free_players.empty()) return out;

  constexpr std::int64_t kBlock = 256;
  const std::int64_t n_blocks = (cfg.k + kBlock - 1) / kBlock;
  const std::uint64_t key = domain_key(cfg.seed, RngDomain::kPermutation);
  std::vector<std::vector<RunningStats>> blocks(static_cast<std::size_t>(n_blocks));

  parallel_for(static_cast<std::size_t>(n_blocks), threads, [&](std::size_t b) {
    std::vector<RunningStats> acc(free_players.size());
    std::vector<std::size_t> order(free_players.size());
    const std::int64_t begin = static_cast<std::int64_t>(b) * kBlock;
    const std::int64_t end = std::min(cfg.k, begin + kBlock);
    for (std::int64_t j = begin; j < end; ++j) {
      CounterRng rng(key, stream_id(j), 0);
      for (std::size_t s = 0; s < order.size(); ++s) order[s] = s;
      rng.shuffle(order);
      Coalition c = cfg.include;
      double previous = game.value(c);
      for (std::size_t slot : order) {
        c.insert(free_players[slot]);
        const double current = game.value(c);
        acc[slot].add(current - previous);
        previous = current;
      }
    }
    blocks[b] = std::move(acc);
  });

  std::vector<RunningStats> total(free_players.size());
  for (const auto& block : blocks) {
    for (std::size_t s = 0; s < total.size(); ++s) total[s].merge(block[s]);
  }
  for (std::size_t s = 0; s < free_players.size(); ++s) {
    const std::size_t p = free_players[s];
    out.values[p] = total[s].mean;
    out.std_error[p] = total[s].standard_error();
    out.samples_used[p] = total[s].count;
    out.status[p] = EntryStatus::kEstimated;
  }
  return out;
}

PowerIndexEstimate shared_sample_estimate(const Game& game, const SamplingConfig& cfg_in,
                                          int threads) {
  const std::size_t n = game.num_players();
  SamplingConfig cfg = cfg_in;
  cfg.normalize(n);
  if (cfg.k < 2) throw InvalidArgument("shared-sample estimation needs k >= 2");

  IndexKind kind = cfg.t == 0.5 ? IndexKind::banzhaf() : IndexKind::biased_banzhaf(cfg.t);
  PowerIndexEstimate out = PowerIndexEstimate::blank(n, kind, EstimateMethod::kSharedSample);
  out.seed = cfg.seed;
  out.samples = cfg.k;
  out.dependent = true;

  const std::uint64_t key = domain_key(cfg.seed, RngDomain::kPool);
  std::vector<Coalition> pool(static_cast<std::size_t>(cfg.k));
  std::vector<double> value(pool.size());
  parallel_for(pool.size(), threads, [&](std::size_t j) {
    CounterRng rng(key, stream_id(static_cast<std::int64_t>(j)), 0);
    pool[j] = sample_coalition(cfg, rng);
    value[j] = game.value(pool[j]);
  });

  for (std::size_t i = 0; i < n; ++i) {
    if (cfg.include.contains(i) || cfg.exclude.contains(i)) continue;
    RunningStats in, out_stats;
    for (std::size_t j = 0; j < pool.size(); ++j) {
      (pool[j].contains(i) ? in : out_stats).add(value[j]);
    }
    out.samples_used[i] = cfg.k;
    if (in.count == 0 || out_stats.count == 0) {
      out.values[i] = kNaN;
      out.std_error[i] = kNaN;
      out.status[i] = EntryStatus::kUndefined;
      continue;
    }
    out.values[i] = in.mean - out_stats.mean;
    const double var_in = in.sample_variance() / static_cast<double>(in.count);
    const double var_out = out_stats.sample_variance() / static_cast<double>(out_stats.count);
    out.std_error[i] = std::sqrt(var_in + var_out);
    out.status[i] = EntryStatus::kEstimated;
  }
  return out;
}

}  // namespace gtap
