#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "cure_copula/inference.hpp"
#include "cure_copula/simulation.hpp"

using namespace cure_copula;

namespace {

Scenario scenario(CopulaFamily c, double tau, int n, std::uint64_t seed) {
  Scenario s;
  s.model = {c, {MarginalFamily::weibull, std::nullopt}, {MarginalFamily::weibull, std::nullopt}};
  s.alpha = {has_parameter(c) ? theta_from_tau(c, tau) : 0.0, MarginalParams::weibull(0.5, 1.0),
             MarginalParams::weibull(1.0, 1.0), 0.8};
  s.n = n;
  s.seed = seed;
  return s;
}

ModelSpec with_copula(const ModelSpec& m, CopulaFamily c) { return {c, m.latency, m.censoring}; }

}  // namespace

TEST(Inference, Aic) {
  EXPECT_EQ(aic(0.0, 0), 0.0);
  EXPECT_NEAR(aic(-1477.6, 5), 2965.1, 0.2);
  EXPECT_NEAR(aic(-1469.5, 6), 2950.9, 0.2);
  for (int k = 0; k < 10; ++k) EXPECT_LT(aic(-100.0, k), aic(-100.0, k + 1));
  FitResult f;
  f.model.copula = CopulaFamily::independence;
  f.loglik = -10.0;
  EXPECT_EQ(aic(f), 30.0);
  f.model.copula = CopulaFamily::joe;
  EXPECT_EQ(aic(f), 32.0);
}

TEST(Inference, LikelihoodRatioFromLogliks) {
  const auto r = lrt_from_logliks(-1474.1, -1469.5, CopulaFamily::joe);
  EXPECT_NEAR(r.lambda, 9.2, 1e-9);
  EXPECT_EQ(r.df, 1);
  EXPECT_EQ(r.critical_value_95, 3.841458820694124);
  EXPECT_TRUE(r.reject);
  EXPECT_TRUE(r.boundary_caveat);

  const auto same = lrt_from_logliks(-50.0, -50.0, CopulaFamily::frank);
  EXPECT_EQ(same.lambda, 0.0);
  EXPECT_FALSE(same.reject);
  EXPECT_FALSE(same.boundary_caveat);

  const auto noise = lrt_from_logliks(-50.0, -50.0 - 1e-7, CopulaFamily::gaussian);
  EXPECT_EQ(noise.lambda, 0.0);
  EXPECT_FALSE(noise.nesting_violation);

  const auto bad = lrt_from_logliks(-50.0, -51.0, CopulaFamily::gumbel);
  EXPECT_TRUE(bad.nesting_violation);
  EXPECT_FALSE(bad.reject);
}

TEST(Inference, LrtRejectsMismatchedFits) {
  FitResult a;
  a.model = {CopulaFamily::independence, {MarginalFamily::lognormal, std::nullopt}, {MarginalFamily::weibull, std::nullopt}};
  a.n_records = 10;
  a.data_checksum = 123;
  FitResult b = a;
  b.model.copula = CopulaFamily::joe;
  EXPECT_NO_THROW(lrt_vs_independence(a, b));
  EXPECT_THROW(lrt_vs_independence(b, a), UsageError);
  EXPECT_THROW(lrt_vs_independence(a, a), UsageError);
  FitResult c = b;
  c.data_checksum = 124;
  EXPECT_THROW(lrt_vs_independence(a, c), UsageError);
  c = b;
  c.n_records = 11;
  EXPECT_THROW(lrt_vs_independence(a, c), UsageError);
  c = b;
  c.model.latency.family = MarginalFamily::weibull;
  EXPECT_THROW(lrt_vs_independence(a, c), UsageError);
}

TEST(Inference, LrtInvariantUnderUnitChange) {
  const auto scn = scenario(CopulaFamily::frank, 0.4, 300, 8);
  const auto d = generate_dataset(scn);
  Dataset ds = d;
  for (auto& r : ds) r.y *= 7.0;
  FitOptions o;
  o.n_perturbations = 1;
  o.compute_se = false;
  const auto mi = with_copula(scn.model, CopulaFamily::independence);
  const auto l1 = lrt_vs_independence(fit(d, mi, o), fit(d, scn.model, o));
  const auto l2 = lrt_vs_independence(fit(ds, mi, o), fit(ds, scn.model, o));
  EXPECT_NEAR(l1.lambda, l2.lambda, 1e-6);
  EXPECT_EQ(l1.reject, l2.reject);
  EXPECT_FALSE(l1.nesting_violation);
  EXPECT_FALSE(l2.nesting_violation);
}

TEST(Inference, BootstrapIntervalFormula) {
  const std::vector<double> d{-1.0, -1.5, -0.8, -1.3, -1.6};
  const auto r = bootstrap_interval(-1.25, d);
  double mean = 0.0;
  for (double x : d) mean += x;
  mean /= 5.0;
  double ss = 0.0;
  for (double x : d) ss += (x - mean) * (x - mean);
  EXPECT_NEAR(r.sd_hat, std::sqrt(ss / 4.0), 1e-15);
  EXPECT_EQ(r.ci_upper - r.diff, r.diff - r.ci_lower);
  EXPECT_NEAR(r.ci_upper - r.ci_lower, 2.0 * 1.959964 * r.sd_hat, 1e-14);
  EXPECT_TRUE(std::isnan(bootstrap_interval(0.0, {1.0}).sd_hat));
}

TEST(Inference, BootstrapSameModelGivesZero) {
  auto scn = scenario(CopulaFamily::independence, 0.0, 150, 2);
  scn.model.latency.family = MarginalFamily::lognormal;
  scn.alpha.latency = MarginalParams::lognormal(0.8, -0.5);
  const auto d = generate_dataset(scn);
  FitOptions o;
  o.n_perturbations = 0;
  const auto r = bootstrap_median_diff(d, scn.model, scn.model, 100, 5, o);
  EXPECT_EQ(r.diff, 0.0);
  EXPECT_EQ(r.sd_hat, 0.0);
  EXPECT_EQ(r.ci_lower, 0.0);
  EXPECT_EQ(r.ci_upper, 0.0);
  EXPECT_EQ(r.n_boot, 100);
  EXPECT_EQ(r.n_failed + static_cast<int>(r.replicate_diffs.size()), 100);
  EXPECT_THROW(bootstrap_median_diff(d, scn.model, scn.model, 99, 5, o), UsageError);
}

TEST(Inference, BootstrapDeterministic) {
  auto scn = scenario(CopulaFamily::independence, 0.0, 150, 3);
  scn.model.latency.truncation = 2.0;
  const auto d = generate_dataset(scn);
  ModelSpec b = scn.model;
  b.latency.family = MarginalFamily::lognormal;
  FitOptions o;
  o.n_perturbations = 0;
  const auto r1 = bootstrap_median_diff(d, scn.model, b, 100, 11, o);
  const auto r2 = bootstrap_median_diff(d, scn.model, b, 100, 11, o);
  BootstrapOptions par;
  par.threads = 2;
  const auto r3 = bootstrap_median_diff(d, scn.model, b, 100, 11, o, par);
  EXPECT_EQ(r1.replicate_diffs, r2.replicate_diffs);
  EXPECT_EQ(r1.replicate_diffs, r3.replicate_diffs);
  EXPECT_EQ(r1.ci_lower, r3.ci_lower);
  EXPECT_FALSE(r1.flagged);
  EXPECT_GT(r1.sd_hat, 0.0);
  BootstrapOptions fixed;
  fixed.recompute_truncation = false;
  const auto r4 = bootstrap_median_diff(d, scn.model, b, 100, 11, o, fixed);
  EXPECT_EQ(r4.diff, r1.diff);
  EXPECT_NE(r4.replicate_diffs, r1.replicate_diffs);
}
