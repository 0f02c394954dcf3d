// Command-line front end: fit, simulate, mc, tau, lrt, bootstrap.

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "cure_copula/cure_copula.hpp"

namespace cc = cure_copula;

namespace {

struct ModelFlags {
  std::string copula = "independence";
  std::string latency = "weibull";
  std::string censoring = "weibull";
  std::string truncate = "none";
};

void add_model_flags(CLI::App* cmd, ModelFlags& f, bool with_copula = true) {
  if (with_copula) cmd->add_option("--copula", f.copula, "Copula family")->capture_default_str();
  cmd->add_option("--latency", f.latency, "Latency (U) family")->capture_default_str();
  cmd->add_option("--censoring", f.censoring, "Censoring (C) family")->capture_default_str();
  cmd->add_option("--truncate", f.truncate, "Latency truncation: none | last-uncensored | <value>")
      ->capture_default_str();
}

cc::TruncationRule parse_truncation(const std::string& s) {
  if (s == "none") return {cc::TruncationRule::Kind::none, 0.0};
  if (s == "last-uncensored") return {cc::TruncationRule::Kind::last_uncensored, 0.0};
  const auto v = cc::detail::parse_double(s);
  if (!v || !std::isfinite(*v) || *v <= 0.0) {
    throw cc::UsageError("--truncate expects none, last-uncensored or a positive number, got '" + s + "'");
  }
  return {cc::TruncationRule::Kind::fixed, *v};
}

cc::ModelSpec build_model(const ModelFlags& f, const std::string& copula, const cc::Dataset& data) {
  cc::ModelSpec m;
  m.copula = cc::parse_copula_family(copula);
  m.latency.family = cc::parse_marginal_family(f.latency);
  m.censoring.family = cc::parse_marginal_family(f.censoring);
  m.latency.truncation = cc::resolve_truncation(parse_truncation(f.truncate), data);
  return m;
}

cc::Dataset load_data(const std::string& path, double scale) {
  if (!(scale > 0.0 && std::isfinite(scale))) throw cc::UsageError("--scale must be positive");
  cc::Dataset data = path == "-" ? cc::read_csv(std::cin) : cc::read_csv_file(path);
  for (auto& r : data) r.y /= scale;
  return data;
}

void write_output(const std::string& path, const std::string& text) {
  if (path.empty() || path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path);
  if (!out) throw cc::DataError("cannot write " + path);
  out << text;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cc::DataError("cannot open " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string fmt(double x) { return cc::detail::format_double(x); }

std::string mc_table(const cc::McSummary& s) {
  std::ostringstream out;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%-6s", "");
  out << buf;
  for (const auto& n : s.names) {
    std::snprintf(buf, sizeof buf, " %12s", n.c_str());
    out << buf;
  }
  out << "\n";
  auto row = [&](const char* label, auto get) {
    std::snprintf(buf, sizeof buf, "%-6s", label);
    out << buf;
    for (const auto& st : s.stats) {
      std::snprintf(buf, sizeof buf, " %12.4f", get(st));
      out << buf;
    }
    out << "\n";
  };
  row("Bias", [](const cc::McStat& st) { return st.bias; });
  row("SD", [](const cc::McStat& st) { return st.sd; });
  row("SD^", [](const cc::McStat& st) { return st.sd_hat; });
  row("RMSE", [](const cc::McStat& st) { return st.rmse; });
  out << "replications " << s.total << ", failed " << s.failures << ", trimmed " << s.trimmed_each_tail
      << " per tail, retained " << s.retained << (s.unreliable ? " (unreliable)" : "") << "\n";
  std::snprintf(buf, sizeof buf, "mean censoring rate %.4f\n", s.censoring_rate_mean);
  out << buf;
  return out.str();
}

nlohmann::json mc_json(const cc::McSummary& s) {
  nlohmann::json params = nlohmann::json::array();
  auto num = [](double x) { return std::isfinite(x) ? nlohmann::json(x) : nlohmann::json(nullptr); };
  for (std::size_t i = 0; i < s.names.size(); ++i) {
    const auto& st = s.stats[i];
    params.push_back({{"name", s.names[i]},
                      {"truth", s.truth[i]},
                      {"bias", num(st.bias)},
                      {"sd", num(st.sd)},
                      {"sd_hat", num(st.sd_hat)},
                      {"rmse", num(st.rmse)}});
  }
  return {{"parameters", params},
          {"replications", s.total},
          {"failures", s.failures},
          {"trimmed_each_tail", s.trimmed_each_tail},
          {"retained", s.retained},
          {"censoring_rate_mean", s.censoring_rate_mean},
          {"unreliable", s.unreliable}};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Parametric mixture cure models under copula-dependent censoring"};
  app.require_subcommand(1);

  std::uint64_t seed = 0;
  unsigned threads = 0;
  std::string format = "json";
  std::string output;
  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", seed, "Random seed")->capture_default_str();
    cmd->add_option("--threads", threads, "Worker threads (0 = all cores)")->capture_default_str();
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}))->capture_default_str();
    cmd->add_option("-o,--output", output, "Output file (default stdout)");
  };
  int screen_evals = cc::FitOptions{}.screen_evals;
  int refine_top = cc::FitOptions{}.refine_top;
  int perturbations = cc::FitOptions{}.n_perturbations;
  double max_abs_tau = cc::FitOptions{}.max_abs_tau;
  auto add_fit_tuning = [&](CLI::App* cmd) {
    cmd->add_option("--screen-evals", screen_evals, "Screening evaluations per start (0 = full search everywhere)")
        ->capture_default_str();
    cmd->add_option("--refine-top", refine_top, "Screened starts refined with the full search")->capture_default_str();
    cmd->add_option("--perturbations", perturbations, "Random perturbations of the pilot estimates")
        ->capture_default_str();
    cmd->add_option("--max-abs-tau", max_abs_tau, "Search confined to |Kendall's tau| <= this value")
        ->check(CLI::Range(0.0, 1.0))
        ->capture_default_str();
  };
  auto fit_options = [&] {
    cc::FitOptions o;
    o.seed = seed;
    o.threads = threads;
    o.screen_evals = screen_evals;
    o.refine_top = refine_top;
    o.n_perturbations = perturbations;
    o.max_abs_tau = max_abs_tau;
    return o;
  };

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit a cure model to time,status CSV data");
  std::string data_path;
  double scale = 1.0;
  ModelFlags fit_flags;
  fit_cmd->add_option("--data", data_path, "CSV with header time,status ('-' for stdin)")->required();
  fit_cmd->add_option("--scale", scale, "Divide all times by this factor")->capture_default_str();
  add_model_flags(fit_cmd, fit_flags);
  add_common(fit_cmd);
  add_fit_tuning(fit_cmd);

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Generate data from a scenario file");
  std::string scenario_path;
  std::string echo_path;
  bool emit_latent = false;
  std::optional<int> n_override;
  std::optional<std::uint64_t> sim_seed;
  sim_cmd->add_option("--scenario", scenario_path, "Scenario file (key = value)")->required();
  sim_cmd->add_option("-o,--output", output, "Output CSV (default stdout)");
  sim_cmd->add_option("--echo", echo_path, "Write the resolved scenario here (default <output>.scenario)");
  sim_cmd->add_option("--n", n_override, "Override the sample size");
  sim_cmd->add_option("--seed", sim_seed, "Override the scenario seed");
  sim_cmd->add_flag("--emit-latent", emit_latent, "Append latent_t (inf when cured), latent_c and the copula coordinate latent_u");

  // mc
  auto* mc_cmd = app.add_subcommand("mc", "Monte Carlo study with 1% trimming on estimated tau");
  int reps = 100;
  std::string fit_copula;
  ModelFlags mc_flags;
  mc_cmd->add_option("--scenario", scenario_path, "Scenario file")->required();
  mc_cmd->add_option("--reps", reps, "Replications")->capture_default_str();
  mc_cmd->add_option("--fit-copula", fit_copula, "Copula used for fitting (default: the generating one)");
  add_common(mc_cmd);
  add_fit_tuning(mc_cmd);

  // tau
  auto* tau_cmd = app.add_subcommand("tau", "Convert between copula parameter and Kendall's tau");
  std::string family;
  std::optional<double> theta_in;
  std::optional<double> tau_in;
  tau_cmd->add_option("--family", family, "Copula family")->required();
  auto* theta_opt = tau_cmd->add_option("--theta", theta_in, "Copula parameter");
  auto* tau_opt = tau_cmd->add_option("--tau", tau_in, "Kendall's tau");
  theta_opt->excludes(tau_opt);
  tau_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));

  // lrt
  auto* lrt_cmd = app.add_subcommand("lrt", "Likelihood ratio test of a copula fit against independence");
  std::string indep_report;
  std::string copula_report;
  lrt_cmd->add_option("--independence", indep_report, "Fit report of the independence model")->required();
  lrt_cmd->add_option("--copula-fit", copula_report, "Fit report of the copula model")->required();
  lrt_cmd->add_option("--format", format, "Output format")->check(CLI::IsMember({"json", "table"}));

  // bootstrap
  auto* boot_cmd = app.add_subcommand("bootstrap", "Bootstrap interval for a difference of latency medians");
  std::string copula_a = "independence";
  std::string copula_b;
  int n_boot = 1000;
  bool keep_truncation = false;
  ModelFlags boot_flags;
  boot_cmd->add_option("--data", data_path, "CSV with header time,status")->required();
  boot_cmd->add_option("--scale", scale, "Divide all times by this factor")->capture_default_str();
  boot_cmd->add_option("--copula-a", copula_a, "Copula of model A")->capture_default_str();
  boot_cmd->add_option("--copula-b", copula_b, "Copula of model B")->required();
  boot_cmd->add_option("--n-boot", n_boot, "Bootstrap replicates")->capture_default_str();
  boot_cmd->add_flag("--keep-truncation", keep_truncation,
                     "Reuse the original truncation point instead of recomputing it per resample");
  add_model_flags(boot_cmd, boot_flags, false);
  add_common(boot_cmd);
  add_fit_tuning(boot_cmd);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : static_cast<int>(cc::ExitCode::usage);
  }

  try {
    if (fit_cmd->parsed()) {
      const cc::Dataset data = load_data(data_path, scale);
      const cc::ModelSpec model = build_model(fit_flags, fit_flags.copula, data);
      auto opts = fit_options();
      const cc::FitResult result = cc::fit(data, model, opts);
      const cc::FitReport report = cc::make_report(result, seed);
      write_output(output, format == "table" ? cc::format_table(report) : cc::serialize(report));
      return static_cast<int>(result.converged ? cc::ExitCode::ok : cc::ExitCode::numerical);
    }

    if (sim_cmd->parsed()) {
      cc::Scenario scn = cc::scenario_from_config(cc::FlatConfig::parse_file(scenario_path));
      if (n_override) {
        if (*n_override < 2) throw cc::UsageError("--n must be at least 2");
        scn.n = *n_override;
      }
      if (sim_seed) scn.seed = *sim_seed;
      std::vector<cc::LatentRecord> latent;
      const cc::Dataset data = cc::generate_dataset(scn, emit_latent ? &latent : nullptr);
      std::ostringstream csv;
      cc::write_csv(csv, data, emit_latent ? &latent : nullptr);
      write_output(output, csv.str());
      const std::string echo = !echo_path.empty() ? echo_path : (output.empty() || output == "-" ? "" : output + ".scenario");
      if (!echo.empty()) {
        std::ostringstream sc;
        cc::write_scenario(sc, scn);
        write_output(echo, sc.str());
      }
      return 0;
    }

    if (mc_cmd->parsed()) {
      const auto cfg = cc::FlatConfig::parse_file(scenario_path);
      cc::Scenario scn = cc::scenario_from_config(cfg);
      if (mc_cmd->count("--seed") > 0) scn.seed = seed;
      cc::McOptions mo;
      mo.threads = threads;
      std::string fc = fit_copula.empty() ? cfg.get("fit_copula").value_or("") : fit_copula;
      if (!fc.empty()) {
        cc::ModelSpec fm = cc::resolve(scn).model;
        fm.copula = cc::parse_copula_family(fc);
        mo.fit_model = fm;
      }
      auto opts = fit_options();
      const cc::McSummary s = cc::run_mc(scn, reps, opts, mo);
      write_output(output, format == "table" ? mc_table(s) : mc_json(s).dump(2) + "\n");
      return static_cast<int>(s.unreliable ? cc::ExitCode::numerical : cc::ExitCode::ok);
    }

    if (tau_cmd->parsed()) {
      const cc::CopulaFamily fam = cc::parse_copula_family(family);
      if (!theta_in && !tau_in) throw cc::UsageError("give --theta or --tau");
      double th = 0.0;
      double tau = 0.0;
      if (theta_in) {
        th = *theta_in;
        tau = cc::kendall_tau({fam, th});
      } else {
        tau = *tau_in;
        th = cc::theta_from_tau(fam, tau);
      }
      if (format == "table") {
        std::cout << (theta_in ? fmt(tau) : fmt(th)) << "\n";
      } else {
        std::cout << nlohmann::json{{"family", family}, {"theta", th}, {"tau", tau}}.dump(2) << "\n";
      }
      return 0;
    }

    if (lrt_cmd->parsed()) {
      const auto a = cc::fit_summary_from_report(cc::parse_report(read_text(indep_report)));
      const auto b = cc::fit_summary_from_report(cc::parse_report(read_text(copula_report)));
      const cc::LrtResult r = cc::lrt_vs_independence(a, b);
      if (format == "table") {
        std::cout << "lambda " << fmt(r.lambda) << " (df " << r.df << ", critical value " << fmt(r.critical_value_95)
                  << ") " << (r.reject ? "reject independence" : "do not reject independence") << "\n";
        if (r.boundary_caveat) std::cout << "note: null value on the parameter boundary; chi-square(1) is approximate\n";
        if (r.nesting_violation) std::cout << "warning: copula fit has a lower likelihood than the independence fit\n";
      } else {
        std::cout << nlohmann::json{{"lambda", r.lambda},
                                    {"df", r.df},
                                    {"critical_value_95", r.critical_value_95},
                                    {"reject", r.reject},
                                    {"nesting_violation", r.nesting_violation},
                                    {"boundary_caveat", r.boundary_caveat}}
                         .dump(2)
                  << "\n";
      }
      return 0;
    }

    if (boot_cmd->parsed()) {
      const cc::Dataset data = load_data(data_path, scale);
      const cc::ModelSpec a = build_model(boot_flags, copula_a, data);
      const cc::ModelSpec b = build_model(boot_flags, copula_b, data);
      cc::BootstrapOptions bo;
      bo.recompute_truncation = !keep_truncation;
      bo.threads = threads;
      auto opts = fit_options();
      const auto r = cc::bootstrap_median_diff(data, a, b, n_boot, seed, opts, bo);
      if (format == "table") {
        std::ostringstream out;
        out << "median difference " << fmt(r.diff) << "\nsd " << fmt(r.sd_hat) << "\n95% CI (" << fmt(r.ci_lower)
            << ", " << fmt(r.ci_upper) << ")\nfailed replicates " << r.n_failed << " of " << r.n_boot
            << (r.flagged ? " (more than 20%)" : "") << "\n";
        write_output(output, out.str());
      } else {
        write_output(output, nlohmann::json{{"diff", r.diff},
                                            {"sd_hat", r.sd_hat},
                                            {"ci95", {r.ci_lower, r.ci_upper}},
                                            {"n_boot", r.n_boot},
                                            {"n_failed", r.n_failed},
                                            {"flagged", r.flagged}}
                                     .dump(2) +
                                 "\n");
      }
      return static_cast<int>(r.flagged ? cc::ExitCode::numerical : cc::ExitCode::ok);
    }
  } catch (const cc::UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cc::ExitCode::usage);
  } catch (const cc::ParameterDomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cc::ExitCode::usage);
  } catch (const cc::DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cc::ExitCode::usage);
  } catch (const cc::DataError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cc::ExitCode::data);
  } catch (const cc::NumericalError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cc::ExitCode::numerical);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return static_cast<int>(cc::ExitCode::numerical);
  }
  return 0;
}
