#include <gtest/gtest.h>

#include <sstream>
#include <string>

#include "cure_copula/inference.hpp"
#include "cure_copula/io.hpp"
#include "cure_copula/report.hpp"
#include "cure_copula/simulation.hpp"

using namespace cure_copula;

namespace {

std::string error_of(const std::string& csv) {
  std::istringstream in(csv);
  try {
    read_csv(in);
  } catch (const DataError& e) {
    return e.what();
  }
  return "";
}

FlatConfig config(const std::string& text) {
  std::istringstream in(text);
  return FlatConfig::parse(in);
}

const char* kFrankScenario =
    "# Frank, tau 0.5\n"
    "copula = \"frank\"\n"
    "tau = 0.5\n"
    "p = 0.8\n"
    "n = 1000\n"
    "seed = 17\n"
    "latency = \"weibull\"\n"
    "latency_param1 = 0.5\n"
    "latency_param2 = 1\n"
    "censoring = weibull  # unquoted is fine\n"
    "censoring_param1 = 1\n"
    "censoring_param2 = 1\n";

Dataset small_data(std::uint64_t seed) {
  Scenario s = scenario_from_config(config(kFrankScenario));
  s.n = 300;
  s.seed = seed;
  return generate_dataset(s);
}

}  // namespace

TEST(Csv, ReadsRecords) {
  std::istringstream in("time,status\n1.5,1\n\n 2e-3 , 0 \n7,1,inf,3.2,0.9\n");
  const auto d = read_csv(in);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d[0], (Record{1.5, 1}));
  EXPECT_EQ(d[1], (Record{2e-3, 0}));
  EXPECT_EQ(d[2], (Record{7.0, 1}));
}

TEST(Csv, ErrorsNameTheLine) {
  EXPECT_NE(error_of("t,s\n1,1\n").find("line 1"), std::string::npos);
  EXPECT_NE(error_of("time,status\n1,1\n2;0\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("time,status\n1,1\n\n-2,0\n").find("line 4"), std::string::npos);
  EXPECT_NE(error_of("time,status\n1,1\n2,2\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("time,status\nabc,1\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("time,status\n0,1\n").find("line 2"), std::string::npos);
  EXPECT_NE(error_of("").find("header"), std::string::npos);
  EXPECT_THROW(read_csv_file("/nonexistent/data.csv"), DataError);
}

TEST(Csv, WriteReadRoundTrip) {
  const auto d = small_data(3);
  std::ostringstream out;
  write_csv(out, d);
  std::istringstream in(out.str());
  EXPECT_EQ(read_csv(in), d);

  Scenario s = scenario_from_config(config(kFrankScenario));
  s.n = 50;
  std::vector<LatentRecord> latent;
  const auto dl = generate_dataset(s, &latent);
  std::ostringstream out2;
  write_csv(out2, dl, &latent);
  EXPECT_EQ(out2.str().substr(0, out2.str().find('\n')), "time,status,latent_t,latent_c,latent_u");
  std::istringstream in2(out2.str());
  EXPECT_EQ(read_csv(in2), dl);
}

TEST(Config, ParsesAndRejects) {
  const auto c = config("a = 1 # comment\nb = \"x # not a comment\"\n\n# only comment\n");
  EXPECT_EQ(c.get("a"), "1");
  EXPECT_EQ(c.get("b"), "x # not a comment");
  EXPECT_EQ(c.get_double("a"), 1.0);
  EXPECT_FALSE(c.has("c"));
  EXPECT_THROW(c.get_double("b"), DataError);
  EXPECT_THROW(config("a = 1\na = 2\n"), DataError);
  EXPECT_THROW(config("novalue\n"), DataError);
}

TEST(Config, ScenarioFromConfig) {
  const auto s = scenario_from_config(config(kFrankScenario));
  EXPECT_EQ(s.model.copula, CopulaFamily::frank);
  EXPECT_NEAR(kendall_tau({CopulaFamily::frank, s.alpha.theta}), 0.5, 1e-10);
  EXPECT_EQ(s.n, 1000);
  EXPECT_EQ(s.seed, 17u);
  EXPECT_EQ(s.alpha.latency, MarginalParams::weibull(0.5, 1.0));

  // Echo of the resolved scenario reads back to the same scenario.
  std::ostringstream echo;
  write_scenario(echo, s);
  const auto back = scenario_from_config(config(echo.str()));
  EXPECT_EQ(back, s);

  const std::string base(kFrankScenario);
  EXPECT_THROW(scenario_from_config(config(base + "theta = 5\n")), UsageError);
  std::string zero = base;
  zero.replace(zero.find("n = 1000"), 8, "n = 0");
  EXPECT_THROW(scenario_from_config(config(zero)), UsageError);
  EXPECT_THROW(scenario_from_config(config(base + "colour = 1\n")), UsageError);
  std::string indep = base;
  indep.replace(indep.find("\"frank\""), 7, "\"independence\"");
  EXPECT_THROW(scenario_from_config(config(indep)), UsageError);
  std::string bad_family = base;
  bad_family.replace(bad_family.find("\"frank\""), 7, "\"franc\"");
  try {
    scenario_from_config(config(bad_family));
    FAIL();
  } catch (const UsageError& e) {
    EXPECT_NE(std::string(e.what()).find("clayton270"), std::string::npos);
  }
}

TEST(Config, TruncatedScenarioEcho) {
  const auto s = scenario_from_config(config(std::string(kFrankScenario) + "truncate_tail = 0.05\n"));
  ASSERT_TRUE(s.truncate_upper_tail.has_value());
  std::ostringstream echo;
  write_scenario(echo, s);
  const auto back = scenario_from_config(config(echo.str()));
  EXPECT_EQ(back.model.latency.truncation, resolve(s).model.latency.truncation);
  EXPECT_EQ(generate_dataset(back), generate_dataset(s));
}

TEST(Report, RoundTripsThroughJson) {
  const auto d = small_data(4);
  FitOptions o;
  o.n_perturbations = 1;
  o.compute_se = true;
  for (auto c : {CopulaFamily::independence, CopulaFamily::frank}) {
    const ModelSpec m{c, {MarginalFamily::weibull, last_uncensored_time(d)}, {MarginalFamily::weibull, std::nullopt}};
    const auto f = fit(d, m, o);
    const auto r = make_report(f, 9);
    EXPECT_EQ(parse_report(serialize(r)), r);
    EXPECT_EQ(serialize(parse_report(serialize(r))), serialize(r));
    EXPECT_NEAR(r.aic, 2.0 * r.neg_loglik + 2.0 * r.k, 1e-9);
    EXPECT_EQ(r.checksum, detail::hex64(data_checksum(d)));
    EXPECT_FALSE(format_table(r).empty());
    if (c == CopulaFamily::independence) {
      EXPECT_EQ(r.k, 5);
      EXPECT_FALSE(r.tau_hat.has_value());
      EXPECT_FALSE(to_json(r).contains("tau"));
      EXPECT_EQ(r.parameters.size(), 5u);
    } else {
      EXPECT_EQ(r.k, 6);
      EXPECT_TRUE(to_json(r).contains("tau"));
    }
  }
}

TEST(Report, LrtFromReports) {
  const auto d = small_data(5);
  FitOptions o;
  o.n_perturbations = 1;
  const ModelSpec mi{CopulaFamily::independence, {MarginalFamily::weibull, std::nullopt}, {MarginalFamily::weibull, std::nullopt}};
  ModelSpec mf = mi;
  mf.copula = CopulaFamily::frank;
  const auto fi = fit(d, mi, o);
  const auto ff = fit(d, mf, o);
  const auto ri = parse_report(serialize(make_report(fi)));
  const auto rf = parse_report(serialize(make_report(ff)));
  const auto direct = lrt_vs_independence(fi, ff);
  const auto via = lrt_vs_independence(fit_summary_from_report(ri), fit_summary_from_report(rf));
  EXPECT_EQ(direct.lambda, via.lambda);
  EXPECT_EQ(direct.reject, via.reject);
  auto other = rf;
  other.checksum = detail::hex64(12345);
  EXPECT_THROW(lrt_vs_independence(fit_summary_from_report(ri), fit_summary_from_report(other)), UsageError);
}

TEST(Report, MalformedInput) {
  EXPECT_THROW(parse_report("{not json"), DataError);
  EXPECT_THROW(parse_report("{\"model\": {}}"), DataError);
  EXPECT_EQ(detail::parse_hex64(detail::hex64(0xdeadbeef01234567ULL)), 0xdeadbeef01234567ULL);
}
