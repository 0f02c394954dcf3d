#pragma once

// Parametric lifetime distributions with optional right truncation.
//
// Parameter layout (first, second) per family:
//   weibull      (scale lambda, shape k)      F(t) = 1 - exp{-(t/lambda)^k}
//   lognormal    (sigma, mu) of log(t)        F(t) = Phi{(log t - mu) / sigma}
//   loglogistic  (scale alpha, shape beta)    F(t) = 1 / {1 + (t/alpha)^-beta}
//   gamma        (scale theta, shape k)       F(t) = P(k, t/theta)
//
// A truncated spec renormalizes the distribution on [0, tau].

#include <algorithm>
#include <array>
#include <cmath>
#include <optional>
#include <string>
#include <string_view>

#include "cure_copula/error.hpp"
#include "cure_copula/special.hpp"

namespace cure_copula {

enum class MarginalFamily { weibull, lognormal, loglogistic, gamma };

inline constexpr std::array<MarginalFamily, 4> kAllMarginalFamilies{
    MarginalFamily::weibull, MarginalFamily::lognormal, MarginalFamily::loglogistic,
    MarginalFamily::gamma};

inline std::string_view to_string(MarginalFamily family) {
  switch (family) {
    case MarginalFamily::weibull: return "weibull";
    case MarginalFamily::lognormal: return "lognormal";
    case MarginalFamily::loglogistic: return "loglogistic";
    case MarginalFamily::gamma: return "gamma";
  }
  return "?";
}

inline MarginalFamily parse_marginal_family(std::string_view name) {
  for (auto family : kAllMarginalFamilies) {
    if (to_string(family) == name) return family;
  }
  throw UsageError("unknown marginal family '" + std::string(name) +
                   "' (valid: weibull, lognormal, loglogistic, gamma)");
}

/// Names of the two parameters, in storage order.
inline std::array<std::string_view, 2> parameter_names(MarginalFamily family) {
  switch (family) {
    case MarginalFamily::weibull: return {"scale", "shape"};
    case MarginalFamily::lognormal: return {"sigma", "mu"};
    case MarginalFamily::loglogistic: return {"scale", "shape"};
    case MarginalFamily::gamma: return {"scale", "shape"};
  }
  return {"?", "?"};
}

struct MarginalSpec {
  MarginalFamily family = MarginalFamily::weibull;
  std::optional<double> truncation;  // right endpoint tau; absent means [0, inf)

  bool operator==(const MarginalSpec&) const = default;
};

struct MarginalParams {
  double first = 1.0;
  double second = 1.0;

  static MarginalParams weibull(double scale, double shape) { return {scale, shape}; }
  static MarginalParams lognormal(double sigma, double mu) { return {sigma, mu}; }
  static MarginalParams loglogistic(double scale, double shape) { return {scale, shape}; }
  static MarginalParams gamma(double scale, double shape) { return {scale, shape}; }

  bool operator==(const MarginalParams&) const = default;
};

inline bool is_valid(MarginalFamily family, const MarginalParams& params) {
  const bool first_ok = std::isfinite(params.first) && params.first > 0.0;
  if (family == MarginalFamily::lognormal) return first_ok && std::isfinite(params.second);
  return first_ok && std::isfinite(params.second) && params.second > 0.0;
}

inline void validate(const MarginalSpec& spec, const MarginalParams& params) {
  if (spec.truncation && !(std::isfinite(*spec.truncation) && *spec.truncation > 0.0)) {
    throw ParameterDomainError("truncation point must be finite and strictly positive");
  }
  if (!is_valid(spec.family, params)) {
    throw ParameterDomainError("invalid " + std::string(to_string(spec.family)) + " parameters (" +
                               std::to_string(params.first) + ", " + std::to_string(params.second) +
                               ")");
  }
}

namespace detail {

inline double untruncated_cdf(MarginalFamily family, const MarginalParams& m, double t) {
  if (t <= 0.0) return 0.0;
  if (std::isinf(t)) return 1.0;
  switch (family) {
    case MarginalFamily::weibull: return -std::expm1(-std::pow(t / m.first, m.second));
    case MarginalFamily::lognormal: return special::normal_cdf((std::log(t) - m.second) / m.first);
    case MarginalFamily::loglogistic: return 1.0 / (1.0 + std::pow(t / m.first, -m.second));
    case MarginalFamily::gamma: return special::gamma_p(m.second, t / m.first);
  }
  return special::kNaN;
}

inline double untruncated_pdf(MarginalFamily family, const MarginalParams& m, double t) {
  if (t < 0.0 || std::isinf(t)) return 0.0;
  switch (family) {
    case MarginalFamily::weibull: {
      const double k = m.second;
      if (t == 0.0) return k < 1.0 ? special::kInf : (k == 1.0 ? 1.0 / m.first : 0.0);
      const double z = t / m.first;
      const double zk = std::pow(z, k);
      if (std::isinf(zk)) return 0.0;
      return std::exp(std::log(k / m.first) + (k - 1.0) * std::log(z) - zk);
    }
    case MarginalFamily::lognormal: {
      if (t == 0.0) return 0.0;
      const double z = (std::log(t) - m.second) / m.first;
      return special::normal_pdf(z) / (t * m.first);
    }
    case MarginalFamily::loglogistic: {
      const double b = m.second;
      if (t == 0.0) return b < 1.0 ? special::kInf : (b == 1.0 ? 1.0 / m.first : 0.0);
      const double z = t / m.first;
      // f = (b / alpha) z^(b-1) / (1 + z^b)^2, rewritten with z^-b for z > 1.
      if (z <= 1.0) {
        const double zb = std::pow(z, b);
        return b / m.first * zb / z / ((1.0 + zb) * (1.0 + zb));
      }
      const double zmb = std::pow(z, -b);
      return b / m.first * zmb / z / ((1.0 + zmb) * (1.0 + zmb));
    }
    case MarginalFamily::gamma: {
      const double k = m.second;
      if (t == 0.0) return k < 1.0 ? special::kInf : (k == 1.0 ? 1.0 / m.first : 0.0);
      const double z = t / m.first;
      return std::exp((k - 1.0) * std::log(z) - z - std::lgamma(k)) / m.first;
    }
  }
  return special::kNaN;
}

inline double untruncated_quantile(MarginalFamily family, const MarginalParams& m, double q) {
  switch (family) {
    case MarginalFamily::weibull: return m.first * std::pow(-std::log1p(-q), 1.0 / m.second);
    case MarginalFamily::lognormal: return std::exp(m.second + m.first * special::normal_quantile(q));
    case MarginalFamily::loglogistic: return m.first * std::pow(q / (1.0 - q), 1.0 / m.second);
    case MarginalFamily::gamma: {
      // Safeguarded Newton inside a bisection bracket on the CDF.
      double lo = 0.0;
      double hi = m.first * std::max(1.0, m.second);
      while (untruncated_cdf(family, m, hi) < q) {
        lo = hi;
        hi *= 2.0;
      }
      double t = 0.5 * (lo + hi);
      for (int iter = 0; iter < 500; ++iter) {
        const double diff = untruncated_cdf(family, m, t) - q;
        if (std::abs(diff) < 1e-13 || hi - lo < 1e-15 * hi) break;
        if (diff > 0.0) {
          hi = t;
        } else {
          lo = t;
        }
        const double dens = untruncated_pdf(family, m, t);
        double next = dens > 0.0 ? t - diff / dens : 0.5 * (lo + hi);
        if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
        t = next;
      }
      return t;
    }
  }
  return special::kNaN;
}

inline void check_time(double t) {
  if (std::isnan(t) || t < 0.0) throw DomainError("time must be nonnegative, got " + std::to_string(t));
}

}  // namespace detail

/// Distribution function and density evaluated together; no validation.
struct CdfPdf {
  double cdf;
  double pdf;
};

/// Untruncated CDF at the truncation point (1 when untruncated).
inline double truncation_norm(const MarginalSpec& spec, const MarginalParams& params) {
  return spec.truncation ? detail::untruncated_cdf(spec.family, params, *spec.truncation) : 1.0;
}

/// As evaluate() below, with the truncation normalizer supplied by the caller.
inline CdfPdf evaluate(const MarginalSpec& spec, const MarginalParams& params, double t, double norm) {
  if (!spec.truncation) {
    return {detail::untruncated_cdf(spec.family, params, t), detail::untruncated_pdf(spec.family, params, t)};
  }
  const double tau = *spec.truncation;
  if (t > tau) return {1.0, 0.0};
  const double f = detail::untruncated_pdf(spec.family, params, t) / norm;
  if (t == tau) return {1.0, f};
  return {std::min(1.0, detail::untruncated_cdf(spec.family, params, t) / norm), f};
}

inline CdfPdf evaluate(const MarginalSpec& spec, const MarginalParams& params, double t) {
  return evaluate(spec, params, t, truncation_norm(spec, params));
}

inline double pdf(const MarginalSpec& spec, const MarginalParams& params, double t) {
  validate(spec, params);
  detail::check_time(t);
  return evaluate(spec, params, t).pdf;
}

inline double cdf(const MarginalSpec& spec, const MarginalParams& params, double t) {
  validate(spec, params);
  detail::check_time(t);
  return evaluate(spec, params, t).cdf;
}

inline double quantile(const MarginalSpec& spec, const MarginalParams& params, double q) {
  validate(spec, params);
  if (!(q > 0.0 && q < 1.0)) throw DomainError("quantile level must lie in (0,1), got " + std::to_string(q));
  if (!spec.truncation) return detail::untruncated_quantile(spec.family, params, q);
  return std::min(*spec.truncation,
                  detail::untruncated_quantile(spec.family, params, q * truncation_norm(spec, params)));
}

inline double median(const MarginalSpec& spec, const MarginalParams& params) {
  return quantile(spec, params, 0.5);
}

}  // namespace cure_copula
