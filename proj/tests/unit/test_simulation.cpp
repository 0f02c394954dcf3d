#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <vector>

#include "cure_copula/simulation.hpp"

using namespace cure_copula;

namespace {

Scenario weibull_scenario(CopulaFamily c, double tau, double p, int n, std::uint64_t seed) {
  Scenario s;
  s.model = {c, {MarginalFamily::weibull, std::nullopt}, {MarginalFamily::weibull, std::nullopt}};
  s.alpha = {has_parameter(c) ? theta_from_tau(c, tau) : 0.0, MarginalParams::weibull(0.5, 1.0),
             MarginalParams::weibull(1.0, 1.0), p};
  s.n = n;
  s.seed = seed;
  return s;
}

// Largest deviation between the empirical copula of the latent pairs and C
// on the 10x10 grid {0.1, ..., 1}^2.
double joint_law_deviation(const Scenario& scenario, int n) {
  Scenario scn = resolve(scenario);
  scn.n = n;
  std::vector<LatentRecord> latent;
  generate_dataset(scn, &latent);
  int counts[10][10] = {};
  for (const auto& r : latent) {
    const double u = std::isinf(r.t) ? r.u : scn.alpha.p * cdf(scn.model.latency, scn.alpha.latency, r.t);
    const double v = cdf(scn.model.censoring, scn.alpha.censoring, r.c);
    const int i0 = std::min(9, static_cast<int>(std::ceil(u * 10.0)) - 1);
    const int j0 = std::min(9, static_cast<int>(std::ceil(v * 10.0)) - 1);
    for (int i = std::max(i0, 0); i < 10; ++i) {
      for (int j = std::max(j0, 0); j < 10; ++j) ++counts[i][j];
    }
  }
  const CopulaSpec cop = copula_of(scn.model, scn.alpha);
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    for (int j = 0; j < 10; ++j) {
      const double emp = counts[i][j] / static_cast<double>(n);
      worst = std::max(worst, std::abs(emp - copula_cdf(cop, (i + 1) / 10.0, (j + 1) / 10.0)));
    }
  }
  return worst;
}

Replication rep(double tau_hat, std::vector<double> est, bool ok = true) {
  Replication r;
  r.converged = ok;
  r.tau_hat = tau_hat;
  r.estimates = std::move(est);
  r.se.assign(r.estimates.size(), 0.1);
  return r;
}

}  // namespace

TEST(Simulation, SameSeedSameDataset) {
  const auto s = weibull_scenario(CopulaFamily::frank, 0.5, 0.8, 500, 42);
  EXPECT_EQ(generate_dataset(s), generate_dataset(s));
  auto t = s;
  t.seed = 43;
  EXPECT_NE(generate_dataset(s), generate_dataset(t));
}

TEST(Simulation, RecordsAreMinimumOfLatentTimes) {
  auto s = weibull_scenario(CopulaFamily::clayton270, -0.4, 0.7, 2000, 1);
  std::vector<LatentRecord> latent;
  const auto d = generate_dataset(s, &latent);
  ASSERT_EQ(latent.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(d[i].y, std::min(latent[i].t, latent[i].c));
    EXPECT_EQ(d[i].delta, latent[i].t <= latent[i].c ? 1 : 0);
    EXPECT_EQ(std::isinf(latent[i].t), latent[i].u > s.alpha.p);
  }
}

TEST(Simulation, ExchangeableTimesWithoutCure) {
  // p close to 1, independent T and C with one law: half the records are events.
  Scenario s;
  s.model = {CopulaFamily::independence, {MarginalFamily::gamma, std::nullopt}, {MarginalFamily::gamma, std::nullopt}};
  s.alpha = {0.0, MarginalParams::gamma(2.0, 1.5), MarginalParams::gamma(2.0, 1.5), 1.0 - 1e-12};
  s.n = 100000;
  s.seed = 5;
  EXPECT_NEAR(1.0 - censored_fraction(generate_dataset(s)), 0.5, 0.005);
}

TEST(Simulation, LatentCureFraction) {
  auto s = weibull_scenario(CopulaFamily::gumbel, 0.5, 0.8, 100000, 9);
  std::vector<LatentRecord> latent;
  generate_dataset(s, &latent);
  const auto cured = std::count_if(latent.begin(), latent.end(), [](const LatentRecord& r) { return std::isinf(r.t); });
  EXPECT_NEAR(static_cast<double>(cured) / 1e5, 0.2, 0.004);
}

TEST(Simulation, JointLawMatchesCopula) {
  EXPECT_LE(joint_law_deviation(weibull_scenario(CopulaFamily::frank, 0.5, 0.8, 0, 11), 100000), 0.01);
  EXPECT_LE(joint_law_deviation(weibull_scenario(CopulaFamily::clayton90, -0.5, 0.6, 0, 12), 100000), 0.01);
  EXPECT_LE(joint_law_deviation(weibull_scenario(CopulaFamily::gaussian, 0.8, 0.8, 0, 13), 100000), 0.01);
  auto t = weibull_scenario(CopulaFamily::joe, 0.3, 0.8, 0, 14);
  t.model.latency.family = MarginalFamily::lognormal;
  t.alpha.latency = MarginalParams::lognormal(0.7, 0.2);
  t.truncate_upper_tail = 0.05;
  EXPECT_LE(joint_law_deviation(t, 100000), 0.01);
}

TEST(Simulation, TailTruncation) {
  auto s = weibull_scenario(CopulaFamily::frank, 0.5, 0.6, 5000, 3);
  s.truncate_upper_tail = 0.05;
  const auto r = resolve(s);
  ASSERT_TRUE(r.model.latency.truncation.has_value());
  EXPECT_NEAR(*r.model.latency.truncation, 0.5 * -std::log(0.05), 1e-12);
  for (const auto& rec : generate_dataset(s)) {
    if (rec.delta == 1) EXPECT_LE(rec.y, *r.model.latency.truncation);
  }
  s.truncate_upper_tail = 1.5;
  EXPECT_THROW(resolve(s), UsageError);
}

TEST(Simulation, ScenarioValidation) {
  auto s = weibull_scenario(CopulaFamily::frank, 0.5, 0.8, 1, 0);
  EXPECT_THROW(generate_dataset(s), UsageError);
  s.n = 10;
  s.alpha.p = 1.2;
  EXPECT_THROW(generate_dataset(s), ParameterDomainError);
}

TEST(Simulation, CensoringRate) {
  const auto s = weibull_scenario(CopulaFamily::frank, 0.5, 0.8, 0, 0);
  EXPECT_THROW(censoring_rate(s, 9999), UsageError);
  EXPECT_NEAR(censoring_rate(s, 200000), 0.4686, 0.01);
  EXPECT_EQ(censored_fraction({{1.0, 0}, {2.0, 1}, {3.0, 0}, {4.0, 1}}), 0.5);
}

TEST(Simulation, TrimCount) {
  EXPECT_EQ(trim_count(10), 1);
  EXPECT_EQ(trim_count(100), 1);
  EXPECT_EQ(trim_count(101), 2);
  EXPECT_EQ(trim_count(200), 2);
  EXPECT_EQ(trim_count(1000), 10);
}

TEST(Simulation, RetainedCountFormula) {
  for (int total : {10, 100, 1000}) {
    for (int failures : {0, 3}) {
      std::vector<Replication> reps;
      for (int i = 0; i < total; ++i) {
        const double x = std::sin(1.0 + i);  // arbitrary order
        reps.push_back(rep(x, {x}, i >= failures));
      }
      const auto s = summarize_replications(reps, {"tau"}, {0.0});
      EXPECT_EQ(s.total, total);
      EXPECT_EQ(s.failures, failures);
      EXPECT_EQ(s.retained, total - 2 * trim_count(total) - failures);
      EXPECT_FALSE(s.unreliable);
    }
  }
  std::vector<Replication> reps;
  for (int i = 0; i < 1000; ++i) reps.push_back(rep(i * 0.001, {0.0}));
  EXPECT_EQ(summarize_replications(reps, {"tau"}, {0.0}).retained, 980);
}

TEST(Simulation, TrimmingIsSymmetricInTauRank) {
  // tau-hat ranks 0..99 shuffled; the estimate records the rank.
  std::vector<Replication> reps;
  for (int i = 0; i < 100; ++i) {
    const int r = (i * 37) % 100;
    reps.push_back(rep(r / 100.0, {static_cast<double>(r)}));
  }
  reps[0].estimates[0] = 1e6;  // rank 0 outlier is trimmed
  const auto s = summarize_replications(reps, {"rank"}, {0.0});
  EXPECT_EQ(s.retained, 98);
  EXPECT_NEAR(s.stats[0].bias, 49.5, 1e-12);  // mean of ranks 1..98
}

TEST(Simulation, RmseDecomposition) {
  std::vector<Replication> reps;
  for (int i = 0; i < 200; ++i) {
    const double t = std::cos(0.3 * i);
    reps.push_back(rep(t, {t, 0.8 + 0.01 * std::sin(i), 3.0 + 0.5 * t * t}));
  }
  const auto s = summarize_replications(reps, {"tau", "p", "x"}, {0.1, 0.8, 3.0});
  for (const auto& st : s.stats) {
    EXPECT_NEAR(st.rmse * st.rmse, st.bias * st.bias + st.sd * st.sd, 1e-9);
    EXPECT_NEAR(st.sd_hat, 0.1, 1e-15);
  }
}

TEST(Simulation, DegenerateReplications) {
  std::vector<Replication> reps(50, rep(0.3, {0.3, 0.75}));
  const auto s = summarize_replications(reps, {"tau", "p"}, {0.5, 0.8});
  EXPECT_EQ(s.stats[0].sd, 0.0);
  EXPECT_NEAR(s.stats[0].bias, -0.2, 1e-15);
  EXPECT_NEAR(s.stats[1].bias, -0.05, 1e-15);
  EXPECT_NEAR(s.stats[1].rmse, 0.05, 1e-15);
}

TEST(Simulation, MostlyFailedRunIsUnreliable) {
  std::vector<Replication> reps;
  for (int i = 0; i < 20; ++i) reps.push_back(rep(0.1 * i, {0.1 * i}, i < 9));
  const auto s = summarize_replications(reps, {"tau"}, {0.0});
  EXPECT_TRUE(s.unreliable);
  EXPECT_EQ(s.failures, 11);
}

TEST(Simulation, ReplicationSeeds) {
  EXPECT_EQ(replication_seed(100, 3), mix_seed(103));
  EXPECT_NE(replication_seed(100, 3), replication_seed(100, 4));
}

TEST(Simulation, ParallelMatchesSequential) {
  const auto s = weibull_scenario(CopulaFamily::frank, 0.5, 0.8, 200, 77);
  FitOptions o;
  o.n_perturbations = 1;
  o.compute_se = true;
  McOptions seq;
  McOptions par;
  par.threads = 3;
  const auto a = run_mc(s, 10, o, seq);
  const auto b = run_mc(s, 10, o, par);
  EXPECT_EQ(a.names, b.names);
  EXPECT_EQ(a.retained, b.retained);
  EXPECT_EQ(a.failures, b.failures);
  EXPECT_EQ(a.censoring_rate_mean, b.censoring_rate_mean);
  ASSERT_EQ(a.stats.size(), b.stats.size());
  for (std::size_t j = 0; j < a.stats.size(); ++j) {
    EXPECT_EQ(a.stats[j].bias, b.stats[j].bias);
    EXPECT_EQ(a.stats[j].sd, b.stats[j].sd);
    EXPECT_EQ(a.stats[j].rmse, b.stats[j].rmse);
    EXPECT_TRUE(a.stats[j].sd_hat == b.stats[j].sd_hat || (std::isnan(a.stats[j].sd_hat) && std::isnan(b.stats[j].sd_hat)));
  }
  EXPECT_EQ(a.retained, 8 - a.failures);
  EXPECT_EQ(a.names.back(), "theta");
  EXPECT_THROW(run_mc(s, 9, o), UsageError);
}

TEST(Simulation, MisspecifiedFitOmitsTheta) {
  auto s = weibull_scenario(CopulaFamily::independence, 0.0, 0.8, 150, 4);
  FitOptions o;
  o.n_perturbations = 0;
  o.compute_se = false;
  McOptions mc;
  mc.fit_model = ModelSpec{CopulaFamily::joe, s.model.latency, s.model.censoring};
  const auto r = run_mc(s, 10, o, mc);
  EXPECT_EQ(r.names.size(), 6u);
  EXPECT_EQ(r.truth[0], 0.0);
}
