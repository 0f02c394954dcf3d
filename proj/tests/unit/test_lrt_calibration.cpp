#include <gtest/gtest.h>

#include <cstdio>

#include "cure_copula/inference.hpp"
#include "cure_copula/simulation.hpp"

using namespace cure_copula;

// Size of the likelihood ratio test when the data come from the null.
TEST(LrtCalibration, RejectionRateUnderIndependence) {
  constexpr int runs = 500;
  Scenario s;
  s.model = {CopulaFamily::independence, {MarginalFamily::weibull, std::nullopt}, {MarginalFamily::weibull, std::nullopt}};
  s.alpha = {0.0, MarginalParams::weibull(0.5, 1.0), MarginalParams::weibull(1.0, 1.0), 0.8};
  s.n = 200;
  const ModelSpec joe{CopulaFamily::joe, s.model.latency, s.model.censoring};
  FitOptions o;
  o.n_perturbations = 0;
  o.compute_se = false;
  int rejections = 0;
  int violations = 0;
  int caveats = 0;
  for (int i = 0; i < runs; ++i) {
    s.seed = replication_seed(900, static_cast<std::uint64_t>(i));
    o.seed = s.seed;
    const auto d = generate_dataset(s);
    const auto r = lrt_vs_independence(fit(d, s.model, o), fit(d, joe, o));
    rejections += r.reject ? 1 : 0;
    violations += r.nesting_violation ? 1 : 0;
    caveats += r.boundary_caveat ? 1 : 0;
  }
  const double rate = static_cast<double>(rejections) / runs;
  std::printf("rejection rate %.3f over %d runs\n", rate, runs);
  EXPECT_LE(rate, 0.08);
  EXPECT_EQ(violations, 0);
  EXPECT_EQ(caveats, runs);
}
