#pragma once

// Data generation from the cure model and the trimmed Monte Carlo harness.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "cure_copula/copulas.hpp"
#include "cure_copula/cure_model.hpp"
#include "cure_copula/error.hpp"
#include "cure_copula/estimation.hpp"
#include "cure_copula/marginals.hpp"
#include "cure_copula/parallel.hpp"
#include "cure_copula/rng.hpp"

namespace cure_copula {

struct Scenario {
  ModelSpec model;  // model.latency.truncation is filled in by resolve()
  ParamVector alpha;
  int n = 1000;
  std::uint64_t seed = 0;
  /// Fraction of the upper tail of U removed by truncation (e.g. 0.05).
  std::optional<double> truncate_upper_tail;

  bool operator==(const Scenario&) const = default;
};

/// Scenario with the tail-truncation rule turned into a latency truncation point.
inline Scenario resolve(const Scenario& scn) {
  Scenario out = scn;
  if (scn.truncate_upper_tail) {
    const double tail = *scn.truncate_upper_tail;
    if (!(tail > 0.0 && tail < 1.0)) throw UsageError("truncated tail fraction must lie in (0,1)");
    MarginalSpec untruncated{scn.model.latency.family, std::nullopt};
    out.model.latency.truncation = quantile(untruncated, scn.alpha.latency, 1.0 - tail);
  }
  return out;
}

inline void validate(const Scenario& scn) {
  if (scn.n < 2) throw UsageError("scenario sample size must be at least 2, got " + std::to_string(scn.n));
  validate(scn.model, scn.alpha);
}

/// Latent draw behind one record.
struct LatentRecord {
  double u = 0.0;  // copula coordinate for T (u > p means cured)
  double v = 0.0;  // copula coordinate for C
  double t = 0.0;  // +inf when cured
  double c = 0.0;
};

/// Draws n records; when `latent` is given it receives the latent pairs.
inline Dataset generate_dataset(const Scenario& scenario, std::vector<LatentRecord>* latent = nullptr) {
  const Scenario scn = resolve(scenario);
  validate(scn);
  const CopulaSpec cop = copula_of(scn.model, scn.alpha);
  Rng rng(scn.seed);
  Dataset data;
  data.reserve(static_cast<std::size_t>(scn.n));
  if (latent) {
    latent->clear();
    latent->reserve(static_cast<std::size_t>(scn.n));
  }
  const double p = scn.alpha.p;
  for (int i = 0; i < scn.n; ++i) {
    const auto [u, v] = sample_pair(cop, rng);
    double t = std::numeric_limits<double>::infinity();
    if (u <= p) t = quantile(scn.model.latency, scn.alpha.latency, std::min(u / p, 1.0 - 1e-16));
    const double c = quantile(scn.model.censoring, scn.alpha.censoring, v);
    const bool event = t <= c;
    data.push_back({event ? t : c, event ? 1 : 0});
    if (latent) latent->push_back({u, v, t, c});
  }
  return data;
}

inline double censored_fraction(const Dataset& data) {
  if (data.empty()) return std::numeric_limits<double>::quiet_NaN();
  const auto n0 = std::count_if(data.begin(), data.end(), [](const Record& r) { return r.delta == 0; });
  return static_cast<double>(n0) / static_cast<double>(data.size());
}

/// Empirical P(Delta = 0) from one sample of size n_large.
inline double censoring_rate(const Scenario& scn, int n_large) {
  if (n_large < 10000) throw UsageError("censoring_rate needs n_large >= 10000");
  Scenario big = scn;
  big.n = n_large;
  return censored_fraction(generate_dataset(big));
}

// ---- Monte Carlo -------------------------------------------------------------

/// Outcome of one replication, in the aggregated coordinates.
struct Replication {
  bool converged = false;
  double tau_hat = 0.0;
  std::vector<double> estimates;  // one per McSummary::names entry
  std::vector<double> se;         // NaN when unavailable
  double censoring_rate = 0.0;
};

struct McStat {
  double bias = 0.0;
  double sd = 0.0;
  double sd_hat = std::numeric_limits<double>::quiet_NaN();
  double rmse = 0.0;
};

struct McSummary {
  std::vector<std::string> names;
  std::vector<double> truth;
  std::vector<McStat> stats;
  int total = 0;
  int failures = 0;
  int trimmed_each_tail = 0;
  int retained = 0;
  double censoring_rate_mean = 0.0;
  bool unreliable = false;
};

inline int trim_count(int total) { return static_cast<int>(std::ceil(0.01 * total - 1e-12)); }

/// Drops failed replications, trims ceil(1% of total) from each end of the
/// tau-hat ranking and aggregates the rest. SD uses the 1/n convention so that
/// RMSE^2 = bias^2 + SD^2 on the retained set.
inline McSummary summarize_replications(const std::vector<Replication>& reps, const std::vector<std::string>& names,
                                        const std::vector<double>& truth) {
  McSummary s;
  s.names = names;
  s.truth = truth;
  s.total = static_cast<int>(reps.size());
  std::vector<const Replication*> ok;
  for (const auto& r : reps) {
    if (r.converged) ok.push_back(&r);
  }
  s.failures = s.total - static_cast<int>(ok.size());
  s.unreliable = 2 * s.failures > s.total;
  s.trimmed_each_tail = trim_count(s.total);
  std::stable_sort(ok.begin(), ok.end(), [](const Replication* a, const Replication* b) { return a->tau_hat < b->tau_hat; });
  const int k = s.trimmed_each_tail;
  std::vector<const Replication*> kept;
  if (static_cast<int>(ok.size()) > 2 * k) kept.assign(ok.begin() + k, ok.end() - k);
  s.retained = static_cast<int>(kept.size());
  s.stats.resize(names.size());
  if (kept.empty()) {
    s.unreliable = true;
    for (auto& st : s.stats) st = {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN(),
                                   std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    return s;
  }
  const double m = static_cast<double>(kept.size());
  double cr = 0.0;
  for (const auto* r : kept) cr += r->censoring_rate;
  s.censoring_rate_mean = cr / m;
  for (std::size_t j = 0; j < names.size(); ++j) {
    // Shifted by the first retained value so identical estimates give SD = 0 exactly.
    const double shift = kept.front()->estimates[j];
    double mean_dev = 0.0;
    for (const auto* r : kept) mean_dev += r->estimates[j] - shift;
    mean_dev /= m;
    double ss = 0.0;
    double mse = 0.0;
    for (const auto* r : kept) {
      const double d = r->estimates[j] - shift - mean_dev;
      ss += d * d;
      mse += (r->estimates[j] - truth[j]) * (r->estimates[j] - truth[j]);
    }
    const double mean = shift + mean_dev;
    double se_sum = 0.0;
    int se_n = 0;
    for (const auto* r : kept) {
      if (j < r->se.size() && std::isfinite(r->se[j])) {
        se_sum += r->se[j];
        ++se_n;
      }
    }
    McStat& st = s.stats[j];
    st.bias = mean - truth[j];
    st.sd = std::sqrt(ss / m);
    st.rmse = std::sqrt(mse / m);
    st.sd_hat = se_n > 0 ? se_sum / se_n : std::numeric_limits<double>::quiet_NaN();
  }
  return s;
}

struct McOptions {
  /// Model used for fitting; defaults to the data-generating model.
  std::optional<ModelSpec> fit_model;
  unsigned threads = 1;
};

/// Seed of replication i.
inline std::uint64_t replication_seed(std::uint64_t base, std::uint64_t i) { return mix_seed(base + i); }

inline McSummary run_mc(const Scenario& scenario, int reps, const FitOptions& fit_opts, const McOptions& mc = {}) {
  if (reps < 10) throw UsageError("run_mc needs at least 10 replications");
  const Scenario scn = resolve(scenario);
  validate(scn);
  ModelSpec fit_model = mc.fit_model.value_or(scn.model);
  if (mc.fit_model && scn.model.latency.truncation && !fit_model.latency.truncation) {
    fit_model.latency.truncation = scn.model.latency.truncation;
  }
  const bool theta_comparable = fit_model.copula == scn.model.copula && has_parameter(fit_model.copula);

  std::vector<std::string> names{"tau", "p", "latency_1", "latency_2", "censoring_1", "censoring_2"};
  const double true_tau = kendall_tau(copula_of(scn.model, scn.alpha));
  std::vector<double> truth{true_tau,
                            scn.alpha.p,
                            scn.alpha.latency.first,
                            scn.alpha.latency.second,
                            scn.alpha.censoring.first,
                            scn.alpha.censoring.second};
  if (theta_comparable) {
    names.emplace_back("theta");
    truth.push_back(scn.alpha.theta);
  }

  std::vector<Replication> out(static_cast<std::size_t>(reps));
  parallel_for(out.size(), mc.threads, [&](std::size_t i) {
    Scenario rep = scn;
    rep.truncate_upper_tail.reset();
    rep.seed = replication_seed(scn.seed, i);
    const Dataset data = generate_dataset(rep);
    FitOptions opts = fit_opts;
    opts.seed = rep.seed;
    opts.threads = 1;
    Replication r;
    r.censoring_rate = censored_fraction(data);
    try {
      const FitResult f = fit(data, fit_model, opts);
      r.converged = f.converged;
      r.tau_hat = f.tau_hat;
      const auto& a = f.alpha_hat;
      r.estimates = {f.tau_hat, a.p, a.latency.first, a.latency.second, a.censoring.first, a.censoring.second};
      const double nan = std::numeric_limits<double>::quiet_NaN();
      r.se.assign(r.estimates.size(), nan);
      if (f.se.available) {
        const std::size_t off = has_parameter(fit_model.copula) ? 1 : 0;
        r.se = {f.se.tau, f.se.natural[off + 4], f.se.natural[off], f.se.natural[off + 1], f.se.natural[off + 2],
                f.se.natural[off + 3]};
      }
      if (theta_comparable) {
        r.estimates.push_back(a.theta);
        r.se.push_back(f.se.available ? f.se.natural[0] : nan);
      }
    } catch (const UsageError&) {
      r.converged = false;  // e.g. a sample without censored records
    }
    out[i] = std::move(r);
  });
  return summarize_replications(out, names, truth);
}

}  // namespace cure_copula
