#pragma once

// Model comparison and bootstrap inference on fitted cure models.

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cure_copula/cure_model.hpp"
#include "cure_copula/error.hpp"
#include "cure_copula/estimation.hpp"
#include "cure_copula/parallel.hpp"
#include "cure_copula/rng.hpp"

namespace cure_copula {

inline constexpr double kZ975 = 1.959964;
inline constexpr double kChiSq1Quantile95 = 3.841458820694124;

inline double aic(double loglik, int k) { return -2.0 * loglik + 2.0 * k; }

inline double aic(const FitResult& fit) { return aic(fit.loglik, parameter_count(fit.model.copula)); }

struct LrtResult {
  double lambda = 0.0;
  int df = 1;
  double critical_value_95 = kChiSq1Quantile95;
  bool reject = false;
  bool nesting_violation = false;
  /// The null value sits on the boundary of the parameter space, so the
  /// chi-square(1) reference is only approximate.
  bool boundary_caveat = false;
};

/// Likelihood ratio statistic 2 (l_copula - l_indep) for a copula family
/// against independence.
inline LrtResult lrt_from_logliks(double loglik_indep, double loglik_copula, CopulaFamily family) {
  LrtResult r;
  r.lambda = 2.0 * (loglik_copula - loglik_indep);
  if (r.lambda < 0.0) {
    if (r.lambda > -1e-6) {
      r.lambda = 0.0;
    } else {
      r.nesting_violation = true;
    }
  }
  r.reject = r.lambda > r.critical_value_95;
  r.boundary_caveat = family != CopulaFamily::frank && family != CopulaFamily::gaussian;
  return r;
}

inline LrtResult lrt_vs_independence(const FitResult& fit_indep, const FitResult& fit_copula) {
  if (fit_indep.model.copula != CopulaFamily::independence) {
    throw UsageError("first fit must use the independence copula");
  }
  if (fit_copula.model.copula == CopulaFamily::independence) {
    throw UsageError("second fit must use a copula with a dependence parameter");
  }
  if (fit_indep.n_records != fit_copula.n_records || fit_indep.data_checksum != fit_copula.data_checksum) {
    throw UsageError("the two fits were computed on different data");
  }
  if (fit_indep.model.latency.family != fit_copula.model.latency.family ||
      fit_indep.model.censoring.family != fit_copula.model.censoring.family) {
    throw UsageError("the two fits use different marginal families");
  }
  return lrt_from_logliks(fit_indep.loglik, fit_copula.loglik, fit_copula.model.copula);
}

struct BootstrapResult {
  double diff = 0.0;
  double sd_hat = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  std::vector<double> replicate_diffs;  // successful replicates only, in replicate order
  int n_boot = 0;
  int n_failed = 0;
  bool flagged = false;  // more than 20% of replicate fits failed
};

/// Normal-approximation interval diff +- z sd, with sd the n-1 standard
/// deviation of the replicate differences.
inline BootstrapResult bootstrap_interval(double diff, const std::vector<double>& replicate_diffs) {
  BootstrapResult r;
  r.diff = diff;
  r.replicate_diffs = replicate_diffs;
  const std::size_t m = replicate_diffs.size();
  if (m >= 2) {
    double mean = 0.0;
    for (double d : replicate_diffs) mean += d;
    mean /= static_cast<double>(m);
    double ss = 0.0;
    for (double d : replicate_diffs) ss += (d - mean) * (d - mean);
    r.sd_hat = std::sqrt(ss / static_cast<double>(m - 1));
  } else {
    r.sd_hat = std::numeric_limits<double>::quiet_NaN();
  }
  r.ci_lower = diff - kZ975 * r.sd_hat;
  r.ci_upper = diff + kZ975 * r.sd_hat;
  return r;
}

struct BootstrapOptions {
  /// Refit truncated latencies with the truncation point moved to the last
  /// uncensored time of each resample; otherwise keep the original point.
  bool recompute_truncation = true;
  unsigned threads = 1;
};

/// Difference of fitted latency medians (model a minus model b) with a
/// nonparametric bootstrap interval.
inline BootstrapResult bootstrap_median_diff(const Dataset& data, const ModelSpec& spec_a, const ModelSpec& spec_b,
                                             int n_boot, std::uint64_t seed, const FitOptions& fit_opts,
                                             const BootstrapOptions& bopts = {}) {
  if (n_boot < 100) throw UsageError("bootstrap needs at least 100 replicates");
  validate_data(data, spec_a, true);
  validate_data(data, spec_b, true);
  auto median_of = [&](const Dataset& d, ModelSpec spec, std::uint64_t s, bool resample, bool* ok) {
    if (resample && bopts.recompute_truncation && spec.latency.truncation) {
      spec.latency.truncation = last_uncensored_time(d);
    }
    FitOptions o = fit_opts;
    o.seed = s;
    o.threads = 1;
    o.compute_se = false;
    const FitResult f = fit(d, spec, o);
    *ok = f.converged;
    return f.converged ? latency_median(f) : std::numeric_limits<double>::quiet_NaN();
  };
  bool ok_a = false;
  bool ok_b = false;
  const double diff = median_of(data, spec_a, seed, false, &ok_a) - median_of(data, spec_b, seed, false, &ok_b);
  if (!ok_a || !ok_b) throw NumericalError("fit on the original data did not converge");

  std::vector<double> diffs(static_cast<std::size_t>(n_boot), std::numeric_limits<double>::quiet_NaN());
  std::vector<char> good(static_cast<std::size_t>(n_boot), 0);
  parallel_for(diffs.size(), bopts.threads, [&](std::size_t b) {
    const std::uint64_t s = mix_seed(seed + 1 + b);
    Rng rng(s);
    Dataset resample(data.size());
    for (auto& r : resample) r = data[rng.index(data.size())];
    try {
      bool a = false;
      bool c = false;
      const double d = median_of(resample, spec_a, s, true, &a) - median_of(resample, spec_b, s, true, &c);
      if (a && c && std::isfinite(d)) {
        diffs[b] = d;
        good[b] = 1;
      }
    } catch (const std::exception&) {
      // e.g. a resample without censored records; counted as a failure
    }
  });
  std::vector<double> kept;
  for (std::size_t b = 0; b < diffs.size(); ++b) {
    if (good[b]) kept.push_back(diffs[b]);
  }
  BootstrapResult r = bootstrap_interval(diff, kept);
  r.n_boot = n_boot;
  r.n_failed = n_boot - static_cast<int>(kept.size());
  r.flagged = 5 * r.n_failed > n_boot;
  return r;
}

}  // namespace cure_copula
