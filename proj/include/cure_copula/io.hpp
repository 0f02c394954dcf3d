#pragma once

// Text formats: `time,status` CSV data and flat key = value scenario files.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "cure_copula/copulas.hpp"
#include "cure_copula/cure_model.hpp"
#include "cure_copula/error.hpp"
#include "cure_copula/marginals.hpp"
#include "cure_copula/simulation.hpp"

namespace cure_copula {

namespace detail {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

inline std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (s == "inf" || s == "Inf") return std::numeric_limits<double>::infinity();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

inline std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

}  // namespace detail

/// Reads `time,status` CSV. Errors name the offending line.
inline Dataset read_csv(std::istream& in) {
  Dataset data;
  std::string line;
  int line_no = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++line_no;
    const auto row = detail::trim(line);
    if (row.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      const auto comma = row.find(',');
      if (comma == std::string_view::npos || detail::trim(row.substr(0, comma)) != "time" ||
          detail::trim(row.substr(comma + 1)).substr(0, 6) != "status") {
        throw DataError("line " + std::to_string(line_no) + ": expected header 'time,status'");
      }
      continue;
    }
    const auto comma = row.find(',');
    if (comma == std::string_view::npos) throw DataError("line " + std::to_string(line_no) + ": expected two fields");
    auto rest = row.substr(comma + 1);
    const auto comma2 = rest.find(',');
    if (comma2 != std::string_view::npos) rest = rest.substr(0, comma2);  // extra columns (latent) ignored
    const auto t = detail::parse_double(row.substr(0, comma));
    if (!t || !std::isfinite(*t) || *t <= 0.0) {
      throw DataError("line " + std::to_string(line_no) + ": time must be a positive number");
    }
    const auto st = detail::trim(rest);
    if (st != "0" && st != "1") throw DataError("line " + std::to_string(line_no) + ": status must be 0 or 1");
    data.push_back({*t, st == "1" ? 1 : 0});
  }
  if (!header_seen) throw DataError("empty input: expected header 'time,status'");
  return data;
}

inline Dataset read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path);
  return read_csv(in);
}

inline void write_csv(std::ostream& out, const Dataset& data, const std::vector<LatentRecord>* latent = nullptr) {
  out << (latent ? "time,status,latent_t,latent_c,latent_u\n" : "time,status\n");
  for (std::size_t i = 0; i < data.size(); ++i) {
    out << detail::format_double(data[i].y) << ',' << data[i].delta;
    if (latent) out << ',' << detail::format_double((*latent)[i].t) << ',' << detail::format_double((*latent)[i].c)
                      << ',' << detail::format_double((*latent)[i].u);
    out << '\n';
  }
}

/// Parsed `key = value` file; `#` starts a comment, values may be quoted.
class FlatConfig {
 public:
  static FlatConfig parse(std::istream& in) {
    FlatConfig cfg;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
      ++line_no;
      std::string_view row = line;
      bool quoted = false;
      for (std::size_t i = 0; i < row.size(); ++i) {
        if (row[i] == '"') quoted = !quoted;
        if (row[i] == '#' && !quoted) {
          row = row.substr(0, i);
          break;
        }
      }
      row = detail::trim(row);
      if (row.empty()) continue;
      const auto eq = row.find('=');
      if (eq == std::string_view::npos) throw DataError("line " + std::to_string(line_no) + ": expected key = value");
      const std::string key(detail::trim(row.substr(0, eq)));
      std::string_view value = detail::trim(row.substr(eq + 1));
      if (value.size() >= 2 && value.front() == '"' && value.back() == '"') value = value.substr(1, value.size() - 2);
      if (key.empty()) throw DataError("line " + std::to_string(line_no) + ": empty key");
      if (cfg.values_.count(key)) throw DataError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
      cfg.values_[key] = std::string(value);
    }
    return cfg;
  }

  static FlatConfig parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open " + path);
    return parse(in);
  }

  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::optional<std::string> get(const std::string& key) const {
    const auto it = values_.find(key);
    if (it == values_.end()) return std::nullopt;
    return it->second;
  }

  std::optional<double> get_double(const std::string& key) const {
    const auto s = get(key);
    if (!s) return std::nullopt;
    const auto v = detail::parse_double(*s);
    if (!v) throw DataError("key '" + key + "': not a number: " + *s);
    return v;
  }

  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

/// Builds a scenario from a flat config. Keys:
///   copula, tau | theta, p, n, seed,
///   latency, latency_param1, latency_param2, latency_truncation, truncate_tail,
///   censoring, censoring_param1, censoring_param2
inline Scenario scenario_from_config(const FlatConfig& cfg) {
  static const std::vector<std::string> known{
      "copula",         "tau",           "theta",     "p",         "n",
      "seed",           "latency",       "latency_param1", "latency_param2", "latency_truncation",
      "truncate_tail",  "censoring",     "censoring_param1", "censoring_param2", "fit_copula"};
  for (const auto& [k, v] : cfg.values()) {
    if (std::find(known.begin(), known.end(), k) == known.end()) throw UsageError("unknown scenario key '" + k + "'");
  }
  auto require = [&](const std::string& key) {
    const auto v = cfg.get_double(key);
    if (!v) throw UsageError("scenario is missing '" + key + "'");
    return *v;
  };
  Scenario s;
  s.model.copula = parse_copula_family(cfg.get("copula").value_or("independence"));
  if (cfg.has("tau") && cfg.has("theta")) throw UsageError("give either tau or theta, not both");
  if (has_parameter(s.model.copula)) {
    if (cfg.has("tau")) {
      s.alpha.theta = theta_from_tau(s.model.copula, *cfg.get_double("tau"));
    } else if (cfg.has("theta")) {
      s.alpha.theta = *cfg.get_double("theta");
    } else {
      throw UsageError("scenario needs tau or theta for the " + std::string(to_string(s.model.copula)) + " copula");
    }
  } else if ((cfg.has("tau") && *cfg.get_double("tau") != 0.0) || cfg.has("theta")) {
    throw UsageError("the independence copula takes no dependence parameter");
  }
  s.alpha.p = require("p");
  const double n = require("n");
  if (n != std::floor(n) || n < 0 || n > 1e9) throw UsageError("n must be a nonnegative integer");
  s.n = static_cast<int>(n);
  if (s.n < 2) throw UsageError("scenario sample size must be at least 2");
  if (const auto seed = cfg.get("seed")) {
    try {
      s.seed = std::stoull(*seed);
    } catch (const std::exception&) {
      throw UsageError("seed must be a nonnegative integer");
    }
  }
  s.model.latency.family = parse_marginal_family(cfg.get("latency").value_or("weibull"));
  s.model.censoring.family = parse_marginal_family(cfg.get("censoring").value_or("weibull"));
  s.alpha.latency = {require("latency_param1"), require("latency_param2")};
  s.alpha.censoring = {require("censoring_param1"), require("censoring_param2")};
  if (cfg.has("latency_truncation") && cfg.has("truncate_tail")) {
    throw UsageError("give either latency_truncation or truncate_tail, not both");
  }
  if (cfg.has("latency_truncation")) s.model.latency.truncation = *cfg.get_double("latency_truncation");
  if (cfg.has("truncate_tail")) s.truncate_upper_tail = *cfg.get_double("truncate_tail");
  validate(resolve(s));
  return s;
}

/// key = value echo of a resolved scenario (theta always explicit).
inline void write_scenario(std::ostream& out, const Scenario& scenario) {
  const Scenario s = resolve(scenario);
  out << "copula = \"" << to_string(s.model.copula) << "\"\n";
  if (has_parameter(s.model.copula)) {
    out << "theta = " << detail::format_double(s.alpha.theta) << "\n";
    out << "# kendall tau = " << detail::format_double(kendall_tau(copula_of(s.model, s.alpha))) << "\n";
  }
  out << "p = " << detail::format_double(s.alpha.p) << "\n";
  out << "n = " << s.n << "\n";
  out << "seed = " << s.seed << "\n";
  out << "latency = \"" << to_string(s.model.latency.family) << "\"\n";
  out << "latency_param1 = " << detail::format_double(s.alpha.latency.first) << "\n";
  out << "latency_param2 = " << detail::format_double(s.alpha.latency.second) << "\n";
  if (s.model.latency.truncation) {
    out << "latency_truncation = " << detail::format_double(*s.model.latency.truncation) << "\n";
  }
  out << "censoring = \"" << to_string(s.model.censoring.family) << "\"\n";
  out << "censoring_param1 = " << detail::format_double(s.alpha.censoring.first) << "\n";
  out << "censoring_param2 = " << detail::format_double(s.alpha.censoring.second) << "\n";
}

}  // namespace cure_copula
