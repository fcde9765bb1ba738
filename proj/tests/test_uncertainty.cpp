#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "gtap/error.hpp"
#include "gtap/network.hpp"
#include "gtap/uncertainty.hpp"
#include "support/hand_network.hpp"
#include "support/oracles.hpp"

using namespace gtap;

namespace {

using fixture::enumerated_variance;
using fixture::hand_network;
using fixture::single_instance;

MCUEConfig cell(double p, double q, std::int64_t k, std::uint64_t seed) {
  MCUEConfig cfg;
  cfg.p = p;
  cfg.q = q;
  cfg.k = k;
  cfg.seed = seed;
  return cfg;
}

Dataset random_batch(std::size_t n, std::uint64_t seed) {
  const Dataset blobs = make_synthetic(SyntheticKind::kBlobs, n, seed);
  return blobs;
}

}  // namespace

TEST(MCUEConfig, ValidationAndRetainedSize) {
  EXPECT_THROW(cell(1.5, 0, 10, 0).validate(), InvalidArgument);
  EXPECT_THROW(cell(0, -0.1, 10, 0).validate(), InvalidArgument);
  EXPECT_THROW(cell(0, 0, 1, 0).validate(), InvalidArgument);
  EXPECT_EQ(cell(0, 0.3, 2, 0).retained(10), 7u);
  EXPECT_EQ(cell(0, 0.25, 2, 0).retained(10), 7u);  // floor(7.5)
  EXPECT_EQ(cell(0, 1.0, 2, 0).retained(10), 0u);
  EXPECT_EQ(cell(0, 0.0, 2, 0).retained(10), 10u);
}

TEST(Mcue, EnumerationOracleOnHandNetwork) {
  const auto net = hand_network();
  const Dataset d = single_instance();
  const double exact = enumerated_variance(net, d);
  ASSERT_GT(exact, 0.0);
  const auto r = mcue(cell(0.5, 0.0, 100000, 42), net, d);
  EXPECT_GT(r.std_error, 0.0);
  EXPECT_LE(std::abs(r.variance - exact), 3.0 * r.std_error)
      << "variance " << r.variance << " exact " << exact << " se " << r.std_error;
}

// E[variance estimate] does not depend on k: averaged over many seeds, both
// k = 20 and k = 40 land within 3 standard errors of the enumerated value.
TEST(Mcue, VarianceEstimatorIsUnbiasedAcrossK) {
  const auto net = hand_network();
  const Dataset d = single_instance(1);
  const double exact = enumerated_variance(net, d);
  for (std::int64_t k : {20, 40}) {
    std::vector<double> estimates;
    for (std::uint64_t seed = 0; seed < 400; ++seed) {
      MCUEConfig cfg = cell(0.5, 0.0, k, seed);
      cfg.bootstrap = 0;
      estimates.push_back(mcue(cfg, net, d).variance);
    }
    const double mean = std::accumulate(estimates.begin(), estimates.end(), 0.0) / 400.0;
    const double se = std::sqrt(oracle::sample_variance(estimates) / 400.0);
    EXPECT_LE(std::abs(mean - exact), 3.0 * se) << "k=" << k;
  }
}

TEST(Mcue, ConstantModelHasZeroVarianceEverywhere) {
  const DenseNetwork zero(NetworkSpec{{2, 5, 2}});
  const Dataset batch = random_batch(64, 3);
  const BatchEvaluator ev(zero, batch);
  MCUEConfig cfg = cell(0, 0, 50, 1);
  cfg.bootstrap = 100;
  const auto grid = band_grid(ev, 5, cfg);
  for (double v : grid.variance) EXPECT_EQ(v, 0.0);
  for (double s : grid.std_error) EXPECT_EQ(s, 0.0);
}

TEST(Mcue, NoRandomnessNoVariance) {
  const auto net = hand_network();
  const auto r = mcue(cell(0.0, 0.0, 200, 5), net, single_instance());
  EXPECT_EQ(r.variance, 0.0);
  EXPECT_EQ(r.std_error, 0.0);
}

TEST(Mcue, BatchAverageWithoutDilutionIsConstant) {
  const auto net = DenseNetwork::glorot(NetworkSpec{{2, 6, 2}}, 1);
  const Dataset batch = random_batch(32, 1);
  MCUEConfig cfg = cell(0.0, 0.0, 10, 2);
  cfg.batch_per_trial = true;
  const auto r = mcue(cfg, net, batch);
  EXPECT_EQ(r.variance, 0.0);
  EXPECT_NEAR(r.mean, BatchEvaluator(net, batch).mean_true_class_probability(
                          Coalition::grand(6)), 1e-15);
}

TEST(Mcue, KeptTrialsReproduceVariance) {
  const auto net = DenseNetwork::glorot(NetworkSpec{{2, 6, 4, 2}}, 2);
  const Dataset batch = random_batch(50, 2);
  MCUEConfig cfg = cell(0.3, 0.2, 300, 9);
  cfg.keep_trials = true;
  const auto r = mcue(cfg, net, batch);
  ASSERT_EQ(r.trials.size(), 300u);
  EXPECT_NEAR(r.variance, oracle::sample_variance(r.trials), 1e-12);
  EXPECT_NEAR(r.mean, std::accumulate(r.trials.begin(), r.trials.end(), 0.0) / 300.0, 1e-12);
  for (double t : r.trials) {
    EXPECT_GE(t, 0.0);
    EXPECT_LE(t, 1.0);
  }
}

TEST(Mcue, CorrectnessOutputIsBinary) {
  const auto net = DenseNetwork::glorot(NetworkSpec{{2, 6, 2}}, 3);
  MCUEConfig cfg = cell(0.5, 0.2, 200, 1);
  cfg.output = TrialOutput::kCorrectness;
  cfg.keep_trials = true;
  for (double t : mcue(cfg, net, random_batch(40, 1)).trials) EXPECT_TRUE(t == 0.0 || t == 1.0);
  EXPECT_EQ(parse_trial_output("correctness"), TrialOutput::kCorrectness);
  EXPECT_EQ(to_string(TrialOutput::kTrueClassProbability), "true_class_prob");
  EXPECT_THROW(parse_trial_output("entropy"), InvalidArgument);
}

TEST(Mcue, EmptyDatasetRejected) {
  const auto net = hand_network();
  Dataset empty;
  empty.n_features = 2;
  empty.n_classes = 2;
  EXPECT_THROW(mcue(cell(0.5, 0, 10, 0), net, empty), InvalidArgument);
}

TEST(Mcue, ThreadsDoNotChangeResult) {
  const auto net = DenseNetwork::glorot(NetworkSpec{{2, 8, 8, 2}}, 6);
  const Dataset batch = random_batch(64, 6);
  const BatchEvaluator ev(net, batch);
  const auto a = mcue(cell(0.4, 0.3, 1000, 3), ev, 1);
  const auto b = mcue(cell(0.4, 0.3, 1000, 3), ev, 4);
  EXPECT_EQ(a.variance, b.variance);
  EXPECT_EQ(a.std_error, b.std_error);
  EXPECT_EQ(a.mean, b.mean);
}

TEST(BandGrid, FullyDilutedEdgesCollapse) {
  const auto net = hand_network();
  const Dataset d = single_instance();
  const BatchEvaluator ev(net, d);
  const auto grid = band_grid(ev, 2, cell(0, 0, 100, 4));
  ASSERT_EQ(grid.p_values, (std::vector<double>{0.0, 1.0}));
  EXPECT_EQ(grid.variance_at(1, 0), 0.0);
  EXPECT_EQ(grid.variance_at(1, 1), 0.0);
  EXPECT_EQ(grid.variance_at(0, 1), 0.0);
  EXPECT_EQ(grid.variance_at(0, 0), 0.0);
}

TEST(BandGrid, DeterministicAcrossRunsAndThreads) {
  const auto net = DenseNetwork::glorot(NetworkSpec{{2, 8, 4, 2}}, 8);
  const Dataset batch = random_batch(64, 8);
  const BatchEvaluator ev(net, batch);
  MCUEConfig cfg = cell(0, 0, 60, 12);
  cfg.bootstrap = 50;
  const auto a = band_grid(ev, 4, cfg, 1);
  const auto b = band_grid(ev, 4, cfg, 3);
  EXPECT_EQ(band_csv(a), band_csv(b));
  EXPECT_EQ(a.variance.size(), 16u);
  for (double v : a.variance) EXPECT_GE(v, 0.0);
  cfg.seed = 13;
  EXPECT_NE(band_csv(a), band_csv(band_grid(ev, 4, cfg)));
  EXPECT_EQ(band_csv(a).substr(0, 25), "p,q,variance,stderr,k,see");
}

TEST(UnitAxis, InclusiveEndpoints) {
  EXPECT_EQ(unit_axis(2), (std::vector<double>{0.0, 1.0}));
  const auto a = unit_axis(21);
  EXPECT_EQ(a.front(), 0.0);
  EXPECT_EQ(a.back(), 1.0);
  EXPECT_NEAR(a[1], 0.05, 1e-15);
  EXPECT_THROW(unit_axis(1), InvalidArgument);
}

namespace {

UncertaintyGrid diagonal_grid(std::size_t points, std::size_t peak) {
  UncertaintyGrid g;
  g.p_values = g.q_values = unit_axis(points);
  g.variance.assign(points * points, 0.01);
  for (std::size_t i = 0; i < points; ++i) g.variance[g.cell(i, i)] = 0.02;
  g.variance[g.cell(peak, peak)] = 0.2;
  g.variance[g.cell(0, points - 1)] = 5.0;  // off-diagonal values are ignored
  return g;
}

}  // namespace

TEST(SelectBias, LocatesDiagonalPeak) {
  // 41 points step 0.025 and contain 0.825 (index 33) and 0.775 (index 31).
  const auto a = select_bias(diagonal_grid(41, 33));
  EXPECT_NEAR(a.t_star, 0.825, 1e-12);
  EXPECT_NEAR(a.d, 0.175, 1e-12);
  EXPECT_EQ(a.d, 1.0 - a.t_star);
  EXPECT_FALSE(a.degenerate);
  EXPECT_EQ(a.diagonal.size(), 41u);

  const auto b = select_bias(diagonal_grid(41, 31));
  EXPECT_NEAR(b.t_star, 0.775, 1e-12);
  EXPECT_NEAR(b.d, 0.225, 1e-12);
}

TEST(SelectBias, TiesAndDegenerateDiagonal) {
  UncertaintyGrid g;
  g.p_values = g.q_values = unit_axis(5);
  g.variance.assign(25, 0.3);
  const auto flat = select_bias(g);
  EXPECT_EQ(flat.t_star, 0.0);
  EXPECT_EQ(flat.d, 1.0);

  g.variance.assign(25, 0.0);
  const auto zero = select_bias(g);
  EXPECT_TRUE(zero.degenerate);
  EXPECT_EQ(zero.t_star, 0.5);
  EXPECT_EQ(zero.d, 0.5);

  UncertaintyGrid off;
  off.p_values = {0.0, 0.5};
  off.q_values = {0.25, 0.75};
  off.variance = {1, 2, 3, 4};
  EXPECT_THROW(select_bias(off), InvalidArgument);
}
