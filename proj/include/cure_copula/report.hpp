#pragma once

// Structured fit report: JSON serialization and a plain-text table.

#include <nlohmann/json.hpp>

#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "cure_copula/copulas.hpp"
#include "cure_copula/error.hpp"
#include "cure_copula/estimation.hpp"
#include "cure_copula/inference.hpp"
#include "cure_copula/marginals.hpp"

namespace cure_copula {

struct ParameterEstimate {
  std::string name;
  double estimate = 0.0;
  std::optional<double> se;

  bool operator==(const ParameterEstimate&) const = default;
};

struct FitReport {
  std::string copula;
  std::string latency;
  std::optional<double> latency_truncation;
  std::string censoring;
  std::vector<ParameterEstimate> parameters;  // natural scale
  std::optional<double> tau_hat;
  std::optional<double> tau_se;
  std::optional<double> median_latency;
  double neg_loglik = 0.0;
  int k = 0;
  double aic = 0.0;
  bool converged = false;
  int n_starts = 0;
  int n_converged = 0;
  int best_start_index = -1;
  std::int64_t underflow_count = 0;
  std::int64_t evaluations = 0;
  bool se_available = false;
  std::optional<double> min_eigenvalue;
  std::uint64_t n_records = 0;
  std::string checksum;
  std::uint64_t seed = 0;

  bool operator==(const FitReport&) const = default;
};

namespace detail {

inline std::optional<double> finite_or_none(double x) {
  return std::isfinite(x) ? std::optional<double>(x) : std::nullopt;
}

inline std::string hex64(std::uint64_t x) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016" PRIx64, x);
  return buf;
}

inline std::uint64_t parse_hex64(const std::string& s) {
  try {
    std::size_t pos = 0;
    const auto v = std::stoull(s, &pos, 16);
    if (pos != s.size()) throw DataError("bad checksum '" + s + "'");
    return v;
  } catch (const std::logic_error&) {
    throw DataError("bad checksum '" + s + "'");
  }
}

}  // namespace detail

inline FitReport make_report(const FitResult& fit, std::uint64_t seed = 0) {
  FitReport r;
  r.copula = std::string(to_string(fit.model.copula));
  r.latency = std::string(to_string(fit.model.latency.family));
  r.latency_truncation = fit.model.latency.truncation;
  r.censoring = std::string(to_string(fit.model.censoring.family));
  const auto names = natural_names(fit.model);
  const auto values = to_natural_vector(fit.model, fit.alpha_hat);
  for (std::size_t i = 0; i < names.size(); ++i) {
    ParameterEstimate e{names[i], values[i], std::nullopt};
    if (fit.se.available) e.se = detail::finite_or_none(fit.se.natural[i]);
    r.parameters.push_back(e);
  }
  if (has_parameter(fit.model.copula)) {
    r.tau_hat = fit.tau_hat;
    if (fit.se.available) r.tau_se = detail::finite_or_none(fit.se.tau);
  }
  if (fit.best_start_index >= 0) {
    try {
      r.median_latency = latency_median(fit);
    } catch (const std::exception&) {
      r.median_latency.reset();
    }
  }
  r.neg_loglik = -fit.loglik;
  r.k = parameter_count(fit.model.copula);
  r.aic = aic(fit);
  r.converged = fit.converged;
  r.n_starts = fit.n_starts;
  r.n_converged = fit.n_converged;
  r.best_start_index = fit.best_start_index;
  r.underflow_count = fit.underflow_count;
  r.evaluations = fit.evaluations;
  r.se_available = fit.se.available;
  r.min_eigenvalue = detail::finite_or_none(fit.se.min_eigenvalue);
  r.n_records = fit.n_records;
  r.checksum = detail::hex64(fit.data_checksum);
  r.seed = seed;
  return r;
}

inline nlohmann::json to_json(const FitReport& r) {
  using nlohmann::json;
  auto opt = [](const std::optional<double>& x) { return x ? json(*x) : json(nullptr); };
  json params = json::array();
  for (const auto& p : r.parameters) params.push_back({{"name", p.name}, {"estimate", p.estimate}, {"se", opt(p.se)}});
  json j;
  j["model"] = {{"copula", r.copula},
                {"latency", r.latency},
                {"latency_truncation", opt(r.latency_truncation)},
                {"censoring", r.censoring}};
  j["parameters"] = params;
  if (r.tau_hat) j["tau"] = {{"estimate", *r.tau_hat}, {"se", opt(r.tau_se)}};
  j["median_latency"] = opt(r.median_latency);
  j["neg_loglik"] = r.neg_loglik;
  j["k"] = r.k;
  j["aic"] = r.aic;
  j["diagnostics"] = {{"converged", r.converged},
                      {"n_starts", r.n_starts},
                      {"n_converged", r.n_converged},
                      {"best_start_index", r.best_start_index},
                      {"underflow_count", r.underflow_count},
                      {"evaluations", r.evaluations},
                      {"se_available", r.se_available},
                      {"min_eigenvalue", opt(r.min_eigenvalue)}};
  j["input"] = {{"records", r.n_records}, {"checksum", r.checksum}};
  j["seed"] = r.seed;
  return j;
}

inline FitReport report_from_json(const nlohmann::json& j) {
  auto opt = [](const nlohmann::json& x) { return x.is_null() ? std::nullopt : std::optional<double>(x.get<double>()); };
  try {
    FitReport r;
    const auto& m = j.at("model");
    r.copula = m.at("copula").get<std::string>();
    r.latency = m.at("latency").get<std::string>();
    r.latency_truncation = opt(m.at("latency_truncation"));
    r.censoring = m.at("censoring").get<std::string>();
    for (const auto& p : j.at("parameters")) {
      r.parameters.push_back({p.at("name").get<std::string>(), p.at("estimate").get<double>(), opt(p.at("se"))});
    }
    if (j.contains("tau")) {
      r.tau_hat = j.at("tau").at("estimate").get<double>();
      r.tau_se = opt(j.at("tau").at("se"));
    }
    r.median_latency = opt(j.at("median_latency"));
    r.neg_loglik = j.at("neg_loglik").get<double>();
    r.k = j.at("k").get<int>();
    r.aic = j.at("aic").get<double>();
    const auto& d = j.at("diagnostics");
    r.converged = d.at("converged").get<bool>();
    r.n_starts = d.at("n_starts").get<int>();
    r.n_converged = d.at("n_converged").get<int>();
    r.best_start_index = d.at("best_start_index").get<int>();
    r.underflow_count = d.at("underflow_count").get<std::int64_t>();
    r.evaluations = d.at("evaluations").get<std::int64_t>();
    r.se_available = d.at("se_available").get<bool>();
    r.min_eigenvalue = opt(d.at("min_eigenvalue"));
    r.n_records = j.at("input").at("records").get<std::uint64_t>();
    r.checksum = j.at("input").at("checksum").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fit report: ") + e.what());
  }
}

inline std::string serialize(const FitReport& r) { return to_json(r).dump(2) + "\n"; }

inline FitReport parse_report(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed fit report: ") + e.what());
  }
  return report_from_json(j);
}

/// The parts of a fit needed to compare it against another fit.
inline FitResult fit_summary_from_report(const FitReport& r) {
  FitResult f;
  f.model.copula = parse_copula_family(r.copula);
  f.model.latency.family = parse_marginal_family(r.latency);
  f.model.latency.truncation = r.latency_truncation;
  f.model.censoring.family = parse_marginal_family(r.censoring);
  f.loglik = -r.neg_loglik;
  f.converged = r.converged;
  f.n_records = r.n_records;
  f.data_checksum = detail::parse_hex64(r.checksum);
  if (r.tau_hat) f.tau_hat = *r.tau_hat;
  return f;
}

/// Human-readable table in the layout estimate (se) per parameter.
inline std::string format_table(const FitReport& r) {
  std::ostringstream out;
  auto num = [](double x) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.4f", x);
    return std::string(buf);
  };
  out << "copula      " << r.copula << "\n";
  out << "latency     " << r.latency;
  if (r.latency_truncation) out << " (truncated at " << num(*r.latency_truncation) << ")";
  out << "\ncensoring   " << r.censoring << "\n\n";
  out << "parameter              estimate        se\n";
  auto row = [&](const std::string& name, double est, const std::optional<double>& se) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%-20s %10s %10s\n", name.c_str(), num(est).c_str(), se ? num(*se).c_str() : "NA");
    out << buf;
  };
  if (r.tau_hat) row("tau", *r.tau_hat, r.tau_se);
  for (const auto& p : r.parameters) row(p.name, p.estimate, p.se);
  out << "\n";
  out << "median latency  " << (r.median_latency ? num(*r.median_latency) : std::string("NA")) << "\n";
  out << "-loglik         " << num(r.neg_loglik) << "\n";
  out << "AIC (k=" << r.k << ")      " << num(r.aic) << "\n";
  out << "converged       " << (r.converged ? "yes" : "no") << " (" << r.n_converged << " refined starts converged, "
      << r.n_starts << " starts)\n";
  out << "underflows      " << r.underflow_count << "\n";
  out << "records         " << r.n_records << " (checksum " << r.checksum << ")\n";
  return out.str();
}

}  // namespace cure_copula
