#pragma once

// Mixture cure model with copula-dependent censoring.
//
//   S_T(t) = 1 - p + p S_U(t)
//   P(T <= t, C <= c) = C(p F_U(t), F_C(c))
//
// Observed sub-densities of (Y, Delta):
//   f(y, 1) = p f_U(y) [1 - h_{C|T}(F_C(y) | p F_U(y))]
//   f(y, 0) = f_C(y)  [1 - h_{T|C}(p F_U(y) | F_C(y))]

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "cure_copula/copulas.hpp"
#include "cure_copula/error.hpp"
#include "cure_copula/marginals.hpp"

namespace cure_copula {

struct ModelSpec {
  CopulaFamily copula = CopulaFamily::independence;
  MarginalSpec latency;    // U, may be truncated
  MarginalSpec censoring;  // C, never truncated

  bool operator==(const ModelSpec&) const = default;
};

struct ParamVector {
  double theta = 0.0;  // ignored for independence
  MarginalParams latency;
  MarginalParams censoring;
  double p = 0.5;

  bool operator==(const ParamVector&) const = default;
};

struct Record {
  double y = 0.0;
  int delta = 0;

  bool operator==(const Record&) const = default;
};

using Dataset = std::vector<Record>;

/// Density terms below this are floored and counted as underflows.
inline constexpr double kDensityFloor = 1e-300;

inline CopulaSpec copula_of(const ModelSpec& model, const ParamVector& alpha) {
  return {model.copula, has_parameter(model.copula) ? alpha.theta : 0.0};
}

inline void validate(const ModelSpec& model) {
  if (model.censoring.truncation) throw UsageError("the censoring distribution cannot be truncated");
  if (model.latency.truncation && !(std::isfinite(*model.latency.truncation) && *model.latency.truncation > 0.0)) {
    throw ParameterDomainError("truncation point must be finite and strictly positive");
  }
}

inline void validate(const ModelSpec& model, const ParamVector& alpha) {
  validate(model);
  if (!(alpha.p > 0.0 && alpha.p < 1.0)) {
    throw ParameterDomainError("incidence p must lie in (0,1), got " + std::to_string(alpha.p));
  }
  validate(copula_of(model, alpha));
  validate(model.latency, alpha.latency);
  validate(model.censoring, alpha.censoring);
}

/// Checks the observations; `for_fitting` additionally requires both event
/// types to be present.
inline void validate_data(const Dataset& data, const ModelSpec& model, bool for_fitting = false) {
  if (data.empty()) throw UsageError("dataset is empty");
  bool any_event = false;
  bool any_censored = false;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data[i];
    if (!(std::isfinite(r.y) && r.y > 0.0)) {
      throw DataError("record " + std::to_string(i + 1) + ": time must be finite and positive");
    }
    if (r.delta != 0 && r.delta != 1) throw DataError("record " + std::to_string(i + 1) + ": status must be 0 or 1");
    if (r.delta == 1 && model.latency.truncation && r.y > *model.latency.truncation) {
      throw DataError("record " + std::to_string(i + 1) + ": event time beyond the latency truncation point");
    }
    any_event = any_event || r.delta == 1;
    any_censored = any_censored || r.delta == 0;
  }
  if (for_fitting && !(any_event && any_censored)) {
    throw UsageError("fitting requires at least one censored and one uncensored observation");
  }
}

inline double survival_T(const ParamVector& alpha, const ModelSpec& model, double t) {
  validate(model, alpha);
  detail::check_time(t);
  return 1.0 - alpha.p + alpha.p * (1.0 - cdf(model.latency, alpha.latency, t));
}

namespace detail {

/// Model pieces that do not depend on the observation.
struct PreparedModel {
  const ModelSpec* model;
  const ParamVector* alpha;
  CopulaSpec copula;
  double latency_norm;
};

inline PreparedModel prepare(const ModelSpec& model, const ParamVector& alpha) {
  return {&model, &alpha, copula_of(model, alpha), truncation_norm(model.latency, alpha.latency)};
}

/// Unfloored observed sub-density.
inline double obs_density_raw(const PreparedModel& pm, double y, int delta) {
  const ParamVector& a = *pm.alpha;
  const auto fu = evaluate(pm.model->latency, a.latency, y, pm.latency_norm);
  const auto fc = evaluate(pm.model->censoring, a.censoring, y);
  const double u = a.p * fu.cdf;
  if (delta == 1) {
    return a.p * fu.pdf * h_c_given_t_unchecked(pm.copula, fc.cdf, u).complement;
  }
  return fc.pdf * h_t_given_c_unchecked(pm.copula, u, fc.cdf).complement;
}

}  // namespace detail

/// Observed sub-density of (y, delta), floored at kDensityFloor.
inline double obs_density(const ParamVector& alpha, const ModelSpec& model, double y, int delta) {
  validate(model, alpha);
  if (!(std::isfinite(y) && y > 0.0)) throw DomainError("observed time must be positive, got " + std::to_string(y));
  if (delta != 0 && delta != 1) throw DomainError("status must be 0 or 1");
  const double f = detail::obs_density_raw(detail::prepare(model, alpha), y, delta);
  return f >= kDensityFloor ? f : kDensityFloor;
}

struct LoglikOptions {
  /// Floored terms tolerated before returning -inf.
  std::int64_t max_underflows = 0;
};

struct LoglikValue {
  double value = 0.0;
  std::int64_t underflows = 0;
};

namespace detail {

/// Pairwise sum split at the midpoint; the result depends only on the sequence,
/// so a dataset concatenated with itself sums to exactly twice its total.
inline double pairwise_sum(const double* x, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += x[i];
    return s;
  }
  const std::size_t half = n / 2;
  return pairwise_sum(x, half) + pairwise_sum(x + half, n - half);
}

/// Log-likelihood without validation; the estimation hot path.
inline LoglikValue loglik_unchecked(const ParamVector& alpha, const ModelSpec& model, const Dataset& data,
                                    const LoglikOptions& opts = {}) {
  const auto pm = prepare(model, alpha);
  thread_local std::vector<double> terms;
  terms.resize(data.size());
  LoglikValue out;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double f = obs_density_raw(pm, data[i].y, data[i].delta);
    if (f >= kDensityFloor && std::isfinite(f)) {
      terms[i] = std::log(f);
    } else {
      ++out.underflows;
      terms[i] = std::log(kDensityFloor);
    }
  }
  out.value = pairwise_sum(terms.data(), terms.size());
  if (out.underflows > opts.max_underflows) out.value = -std::numeric_limits<double>::infinity();
  return out;
}

}  // namespace detail

inline LoglikValue loglik_detailed(const ParamVector& alpha, const ModelSpec& model, const Dataset& data,
                                   const LoglikOptions& opts = {}) {
  validate(model, alpha);
  if (data.empty()) throw UsageError("log-likelihood of an empty dataset");
  validate_data(data, model);
  return detail::loglik_unchecked(alpha, model, data, opts);
}

inline double loglik(const ParamVector& alpha, const ModelSpec& model, const Dataset& data,
                     const LoglikOptions& opts = {}) {
  return loglik_detailed(alpha, model, data, opts).value;
}

/// Number of free parameters: two per margin, p, and theta unless independent.
inline int parameter_count(CopulaFamily family) { return has_parameter(family) ? 6 : 5; }

}  // namespace cure_copula
