#pragma once

// Bivariate copula families used to link the event time T and censoring
// time C. Arguments follow the convention C(u, v) with u = F_T(t) and
// v = F_C(c):
//   h_t_given_c(u | v) = dC/dv (conditional CDF of the first margin)
//   h_c_given_t(v | u) = dC/du (conditional CDF of the second margin)
//
// Rotations of the Clayton copula:
//   C90(u,v)  = v - C(1-u, v)
//   C180(u,v) = u + v - 1 + C(1-u, 1-v)
//   C270(u,v) = u - C(u, 1-v)

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "cure_copula/error.hpp"
#include "cure_copula/rng.hpp"
#include "cure_copula/special.hpp"

namespace cure_copula {

enum class CopulaFamily { independence, frank, gumbel, joe, clayton90, clayton180, clayton270, gaussian };

inline constexpr std::array<CopulaFamily, 8> kAllCopulaFamilies{
    CopulaFamily::independence, CopulaFamily::frank,      CopulaFamily::gumbel,
    CopulaFamily::joe,          CopulaFamily::clayton90,  CopulaFamily::clayton180,
    CopulaFamily::clayton270,   CopulaFamily::gaussian};

inline std::string_view to_string(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::independence: return "independence";
    case CopulaFamily::frank: return "frank";
    case CopulaFamily::gumbel: return "gumbel";
    case CopulaFamily::joe: return "joe";
    case CopulaFamily::clayton90: return "clayton90";
    case CopulaFamily::clayton180: return "clayton180";
    case CopulaFamily::clayton270: return "clayton270";
    case CopulaFamily::gaussian: return "gaussian";
  }
  return "?";
}

inline CopulaFamily parse_copula_family(std::string_view name) {
  for (auto family : kAllCopulaFamilies) {
    if (to_string(family) == name) return family;
  }
  throw UsageError("unknown copula family '" + std::string(name) +
                   "' (valid: independence, frank, gumbel, joe, clayton90, clayton180, clayton270, gaussian)");
}

inline bool has_parameter(CopulaFamily family) { return family != CopulaFamily::independence; }

struct CopulaSpec {
  CopulaFamily family = CopulaFamily::independence;
  double theta = 0.0;

  bool operator==(const CopulaSpec&) const = default;
};

/// Below this magnitude a Frank parameter is treated as independence.
inline constexpr double kFrankIndependenceThreshold = 1e-8;
/// Arguments are clamped to [kUnitClamp, 1 - kUnitClamp] before logs and powers.
inline constexpr double kUnitClamp = 1e-15;

inline bool theta_in_domain(CopulaFamily family, double theta) {
  if (family == CopulaFamily::independence) return true;
  if (!std::isfinite(theta)) return false;
  switch (family) {
    case CopulaFamily::frank: return true;
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return theta >= 1.0;
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton180:
    case CopulaFamily::clayton270: return theta > 0.0;
    case CopulaFamily::gaussian: return theta > -1.0 && theta < 1.0;
    default: return false;
  }
}

inline std::string theta_domain_description(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::independence: return "no parameter";
    case CopulaFamily::frank: return "theta real (|theta| < 1e-8 is independence)";
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return "theta in [1, inf)";
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton180:
    case CopulaFamily::clayton270: return "theta in (0, inf)";
    case CopulaFamily::gaussian: return "theta in (-1, 1)";
  }
  return "?";
}

inline void validate(const CopulaSpec& spec) {
  if (!theta_in_domain(spec.family, spec.theta)) {
    throw ParameterDomainError(std::string(to_string(spec.family)) + " copula: theta = " +
                               std::to_string(spec.theta) + " outside " + theta_domain_description(spec.family));
  }
}

namespace detail {

inline double clamp_unit(double x) { return std::clamp(x, kUnitClamp, 1.0 - kUnitClamp); }

/// log(exp(a) + exp(b) - 1) for a, b >= 0.
inline double log_sum_exp_minus_one(double a, double b) {
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m) - std::exp(-m));
}

// ---- Frank, theta > 0 ------------------------------------------------------
// With E(x) = 1 - exp(-theta x) and D = 1 - exp(-theta):
//   C = -log(1 - E(u)E(v)/D) / theta
//   dC/db = exp(-theta b) E(a) / (D - E(a)E(b))
// D - E(a)E(b) = exp(-theta lo) R with lo = min(a, b), hi = max(a, b) and
//   R = -expm1(-theta (1 - lo)) + exp(-theta (hi - lo)) (-expm1(-theta lo)),
// a sum of nonnegative terms; no exponent exceeds zero, so nothing overflows
// or loses precision to subnormals for large theta.

inline double frank_pos_r(double a, double b, double th) {
  const double lo = std::min(a, b);
  const double hi = std::max(a, b);
  return -std::expm1(-th * (1.0 - lo)) + std::exp(-th * (hi - lo)) * -std::expm1(-th * lo);
}

inline double frank_pos_cdf(double a, double b, double th) {
  const double ea = -std::expm1(-th * a);
  const double eb = -std::expm1(-th * b);
  const double d = -std::expm1(-th);
  const double x = ea * eb / d;
  if (x < 0.5) return -std::log1p(-x) / th;
  return std::min(a, b) - (std::log(frank_pos_r(a, b, th)) - std::log(d)) / th;
}

inline double frank_pos_h(double a, double b, double th) {
  const double ea = -std::expm1(-th * a);
  return std::exp(-th * (b - std::min(a, b))) * ea / frank_pos_r(a, b, th);
}

inline double frank_pos_density(double a, double b, double th) {
  const double d = -std::expm1(-th);
  const double r = frank_pos_r(a, b, th);
  return th * d * std::exp(-th * std::abs(a - b)) / (r * r);
}

inline double frank_pos_h_inverse(double w, double b, double th) {
  const double eb = -std::expm1(-th * b);
  const double d = -std::expm1(-th);
  const double e_b = std::exp(-th * b);
  const double denom = e_b + w * eb;
  const double ea = w * d / denom;
  if (ea < 0.5) return -std::log1p(-ea) / th;
  // 1 - ea = ((1 - w) exp(-theta b) + w exp(-theta)) / denom
  return b - (std::log((1.0 - w) + w * std::exp(-th * (1.0 - b))) - std::log(denom)) / th;
}

// Negative parameters use C_{-t}(a, b) = a - C_t(a, 1 - b).
inline double frank_cdf(double a, double b, double th) {
  return th > 0.0 ? frank_pos_cdf(a, b, th) : a - frank_pos_cdf(a, 1.0 - b, -th);
}
inline double frank_h(double a, double b, double th) {
  return th > 0.0 ? frank_pos_h(a, b, th) : frank_pos_h(a, 1.0 - b, -th);
}
inline double frank_density(double a, double b, double th) {
  return th > 0.0 ? frank_pos_density(a, b, th) : frank_pos_density(a, 1.0 - b, -th);
}
inline double frank_h_inverse(double w, double b, double th) {
  return th > 0.0 ? frank_pos_h_inverse(w, b, th) : frank_pos_h_inverse(w, 1.0 - b, -th);
}

// ---- Gumbel ----------------------------------------------------------------

struct GumbelTerms {
  double x, y;   // -log a, -log b
  double log_a;  // log of A = (x^theta + y^theta)^(1/theta)
  double big_a;
};

inline GumbelTerms gumbel_terms(double a, double b, double th) {
  GumbelTerms t{};
  t.x = -std::log(a);
  t.y = -std::log(b);
  const double lx = th * std::log(t.x);
  const double ly = th * std::log(t.y);
  const double m = std::max(lx, ly);
  const double log_s = m + std::log1p(std::exp(std::min(lx, ly) - m));
  t.log_a = log_s / th;
  t.big_a = std::exp(t.log_a);
  return t;
}

inline double gumbel_cdf(double a, double b, double th) { return std::exp(-gumbel_terms(a, b, th).big_a); }

inline double gumbel_h(double a, double b, double th) {
  const auto t = gumbel_terms(a, b, th);
  return std::exp(-t.big_a + (1.0 - th) * t.log_a + (th - 1.0) * std::log(t.y) + t.y);
}

inline double gumbel_density(double a, double b, double th) {
  const auto t = gumbel_terms(a, b, th);
  const double log_c = -t.big_a + t.x + t.y + (th - 1.0) * (std::log(t.x) + std::log(t.y)) +
                       (1.0 - 2.0 * th) * t.log_a;
  return std::exp(log_c) * (t.big_a + th - 1.0);
}

// ---- Joe -------------------------------------------------------------------
// S = (1-a)^theta + (1-b)^theta - (1-a)^theta (1-b)^theta, C = 1 - S^(1/theta).
// Evaluated through lp = theta log(1-a), lq = theta log(1-b); with m = max, n = min,
// log S = m + log1p(-exp(n - m) expm1(m)).

inline double joe_log_s(double lp, double lq) {
  const double m = std::max(lp, lq);
  const double n = std::min(lp, lq);
  return m + std::log1p(-std::exp(n - m) * std::expm1(m));
}

inline double joe_cdf(double a, double b, double th) {
  const double log_s = joe_log_s(th * std::log1p(-a), th * std::log1p(-b));
  return -std::expm1(log_s / th);
}

inline double joe_h(double a, double b, double th) {
  const double lp = th * std::log1p(-a);
  const double log_s = joe_log_s(lp, th * std::log1p(-b));
  return std::exp((th - 1.0) * std::log1p(-b) + std::log(-std::expm1(lp)) + (1.0 / th - 1.0) * log_s);
}

inline double joe_density(double a, double b, double th) {
  const double log_s = joe_log_s(th * std::log1p(-a), th * std::log1p(-b));
  return std::exp((1.0 / th - 2.0) * log_s + (th - 1.0) * (std::log1p(-a) + std::log1p(-b))) *
         (th - 1.0 + std::exp(log_s));
}

// ---- Clayton (base, theta > 0) -------------------------------------------
// With x = -theta log a, y = -theta log b (both >= 0), C = exp(-log(e^x + e^y - 1) / theta).
// expm1/log1p forms keep full relative accuracy as theta -> 0.

inline double clayton_log_sum(double a, double b, double th) {
  const double x = -th * std::log(a);
  const double y = -th * std::log(b);
  if (std::max(x, y) < 30.0) return std::log1p(std::expm1(x) + std::expm1(y));
  return log_sum_exp_minus_one(x, y);
}

inline double clayton_cdf(double a, double b, double th) { return std::exp(-clayton_log_sum(a, b, th) / th); }

/// dC(a, b)/db = {1 + (b/a)^theta - b^theta}^{-(1+theta)/theta}, where the base
/// equals 1 + b^theta expm1(-theta log a).
inline double clayton_h(double a, double b, double th) {
  const double x = -th * std::log(a);
  const double s = th * std::log(b);
  double log_base;
  if (x < 30.0) {
    log_base = std::log1p(std::exp(s) * std::expm1(x));
  } else {
    const double z = s + x + std::log1p(-std::exp(-x));
    log_base = z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
  }
  return std::exp(-(1.0 + th) / th * log_base);
}

inline double clayton_density(double a, double b, double th) {
  const double log_c = std::log1p(th) - (th + 1.0) * (std::log(a) + std::log(b)) -
                       (2.0 + 1.0 / th) * clayton_log_sum(a, b, th);
  return std::exp(log_c);
}

inline double clayton_h_inverse(double w, double b, double th) {
  const double k = -th / (1.0 + th) * std::log(w);
  const double s = th * std::log(b);
  const double log_inner = k < 30.0 ? std::log1p(std::expm1(k) + std::expm1(s))
                                    : k + std::log1p((std::exp(s) - 1.0) * std::exp(-k));
  return std::exp(std::log(b) - log_inner / th);
}

// ---- Gaussian --------------------------------------------------------------

inline double gaussian_cdf(double a, double b, double rho) {
  return special::bivariate_normal_cdf(special::normal_quantile(a), special::normal_quantile(b), rho);
}

inline double gaussian_h(double a, double b, double rho) {
  const double x = special::normal_quantile(a);
  const double y = special::normal_quantile(b);
  return special::normal_cdf((x - rho * y) / std::sqrt(1.0 - rho * rho));
}

inline double gaussian_density(double a, double b, double rho) {
  const double x = special::normal_quantile(a);
  const double y = special::normal_quantile(b);
  const double one_m = 1.0 - rho * rho;
  return std::exp(-(rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * one_m)) / std::sqrt(one_m);
}

inline double gaussian_h_inverse(double w, double b, double rho) {
  const double y = special::normal_quantile(b);
  return special::normal_cdf(special::normal_quantile(w) * std::sqrt(1.0 - rho * rho) + rho * y);
}

/// Family after collapsing parameter values that reduce to independence.
inline CopulaFamily effective_family(const CopulaSpec& spec) {
  switch (spec.family) {
    case CopulaFamily::frank:
      return std::abs(spec.theta) < kFrankIndependenceThreshold ? CopulaFamily::independence : spec.family;
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return spec.theta == 1.0 ? CopulaFamily::independence : spec.family;
    default: return spec.family;
  }
}

/// Base exchangeable copula evaluated at (a, b); `kind` selects cdf / h / density.
enum class Kind { cdf, h, density };

inline double base_eval(CopulaFamily base, Kind kind, double a, double b, double th) {
  switch (base) {
    case CopulaFamily::frank:
      return kind == Kind::cdf ? frank_cdf(a, b, th) : kind == Kind::h ? frank_h(a, b, th) : frank_density(a, b, th);
    case CopulaFamily::gumbel:
      return kind == Kind::cdf ? gumbel_cdf(a, b, th) : kind == Kind::h ? gumbel_h(a, b, th) : gumbel_density(a, b, th);
    case CopulaFamily::joe:
      return kind == Kind::cdf ? joe_cdf(a, b, th) : kind == Kind::h ? joe_h(a, b, th) : joe_density(a, b, th);
    case CopulaFamily::gaussian:
      return kind == Kind::cdf ? gaussian_cdf(a, b, th) : kind == Kind::h ? gaussian_h(a, b, th) : gaussian_density(a, b, th);
    default:  // Clayton base for all rotations
      return kind == Kind::cdf ? clayton_cdf(a, b, th) : kind == Kind::h ? clayton_h(a, b, th) : clayton_density(a, b, th);
  }
}

/// Conditional CDFs and their complements, computed without the 1 - (1 - x)
/// round trip where the rotation permits.
struct HPair {
  double h;
  double complement;
};

inline HPair h_t_given_c_unchecked(const CopulaSpec& spec, double u, double v) {
  const CopulaFamily fam = effective_family(spec);
  if (fam == CopulaFamily::independence) return {u, 1.0 - u};
  u = clamp_unit(u);
  v = clamp_unit(v);
  const double th = spec.theta;
  switch (fam) {
    case CopulaFamily::clayton90: {
      const double c = clayton_h(1.0 - u, v, th);
      return {1.0 - c, c};
    }
    case CopulaFamily::clayton180: {
      const double c = clayton_h(1.0 - u, 1.0 - v, th);
      return {1.0 - c, c};
    }
    case CopulaFamily::clayton270: {
      const double h = clayton_h(u, 1.0 - v, th);
      return {h, 1.0 - h};
    }
    default: {
      const double h = base_eval(fam, Kind::h, u, v, th);
      return {h, 1.0 - h};
    }
  }
}

inline HPair h_c_given_t_unchecked(const CopulaSpec& spec, double v, double u) {
  const CopulaFamily fam = effective_family(spec);
  if (fam == CopulaFamily::independence) return {v, 1.0 - v};
  u = clamp_unit(u);
  v = clamp_unit(v);
  const double th = spec.theta;
  switch (fam) {
    case CopulaFamily::clayton90: {
      const double h = clayton_h(v, 1.0 - u, th);
      return {h, 1.0 - h};
    }
    case CopulaFamily::clayton180: {
      const double c = clayton_h(1.0 - v, 1.0 - u, th);
      return {1.0 - c, c};
    }
    case CopulaFamily::clayton270: {
      const double c = clayton_h(1.0 - v, u, th);
      return {1.0 - c, c};
    }
    default: {
      const double h = base_eval(fam, Kind::h, v, u, th);
      return {h, 1.0 - h};
    }
  }
}

inline double cdf_unchecked(const CopulaSpec& spec, double u, double v) {
  if (u <= 0.0 || v <= 0.0) return 0.0;
  if (u >= 1.0) return std::min(v, 1.0);
  if (v >= 1.0) return u;
  const CopulaFamily fam = effective_family(spec);
  if (fam == CopulaFamily::independence) return u * v;
  u = clamp_unit(u);
  v = clamp_unit(v);
  const double th = spec.theta;
  double c;
  switch (fam) {
    case CopulaFamily::clayton90: c = v - clayton_cdf(1.0 - u, v, th); break;
    case CopulaFamily::clayton180: c = u + v - 1.0 + clayton_cdf(1.0 - u, 1.0 - v, th); break;
    case CopulaFamily::clayton270: c = u - clayton_cdf(u, 1.0 - v, th); break;
    default: c = base_eval(fam, Kind::cdf, u, v, th);
  }
  // Frechet-Hoeffding bounds absorb rounding near the edges.
  return std::clamp(c, std::max(0.0, u + v - 1.0), std::min(u, v));
}

inline double density_unchecked(const CopulaSpec& spec, double u, double v) {
  const CopulaFamily fam = effective_family(spec);
  if (fam == CopulaFamily::independence) return 1.0;
  u = clamp_unit(u);
  v = clamp_unit(v);
  const double th = spec.theta;
  switch (fam) {
    case CopulaFamily::clayton90: return clayton_density(1.0 - u, v, th);
    case CopulaFamily::clayton180: return clayton_density(1.0 - u, 1.0 - v, th);
    case CopulaFamily::clayton270: return clayton_density(u, 1.0 - v, th);
    default: return base_eval(fam, Kind::density, u, v, th);
  }
}

inline void check_unit(double x, const char* name) {
  if (!(x >= 0.0 && x <= 1.0)) throw DomainError(std::string(name) + " must lie in [0,1], got " + std::to_string(x));
}

}  // namespace detail

inline double copula_cdf(const CopulaSpec& spec, double u, double v) {
  validate(spec);
  detail::check_unit(u, "u");
  detail::check_unit(v, "v");
  return detail::cdf_unchecked(spec, u, v);
}

/// dC(u, v)/dv: P(F_T(T) <= u | F_C(C) = v).
inline double h_t_given_c(const CopulaSpec& spec, double u, double v) {
  validate(spec);
  detail::check_unit(u, "u");
  detail::check_unit(v, "v");
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  return std::clamp(detail::h_t_given_c_unchecked(spec, u, v).h, 0.0, 1.0);
}

/// dC(u, v)/du: P(F_C(C) <= v | F_T(T) = u).
inline double h_c_given_t(const CopulaSpec& spec, double v, double u) {
  validate(spec);
  detail::check_unit(u, "u");
  detail::check_unit(v, "v");
  if (v == 0.0) return 0.0;
  if (v == 1.0) return 1.0;
  return std::clamp(detail::h_c_given_t_unchecked(spec, v, u).h, 0.0, 1.0);
}

inline double copula_density(const CopulaSpec& spec, double u, double v) {
  validate(spec);
  if (!(u > 0.0 && u < 1.0 && v > 0.0 && v < 1.0)) {
    throw DomainError("copula density requires interior arguments");
  }
  return detail::density_unchecked(spec, u, v);
}

// ---- Kendall's tau -----------------------------------------------------------

/// Closed-form Kendall's tau of the copula.
inline double kendall_tau(const CopulaSpec& spec) {
  validate(spec);
  const double th = spec.theta;
  switch (detail::effective_family(spec)) {
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::frank: {
      const double a = std::abs(th);
      const double tau = 1.0 - 4.0 / a * (1.0 - special::debye1(a));
      return th > 0.0 ? tau : -tau;
    }
    case CopulaFamily::gumbel: return 1.0 - 1.0 / th;
    case CopulaFamily::joe: {
      auto joe_tau = [](double t) {
        return 1.0 + 2.0 / (2.0 - t) * (special::digamma(2.0) - special::digamma(2.0 / t + 1.0));
      };
      constexpr double gap = 1e-5;  // removable singularity at theta = 2
      if (std::abs(th - 2.0) < gap) {
        const double lo = joe_tau(2.0 - gap);
        const double hi = joe_tau(2.0 + gap);
        return lo + (hi - lo) * (th - (2.0 - gap)) / (2.0 * gap);
      }
      return joe_tau(th);
    }
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton270: return -th / (th + 2.0);
    case CopulaFamily::clayton180: return th / (th + 2.0);
    case CopulaFamily::gaussian: return 2.0 / std::numbers::pi * std::asin(th);
  }
  return special::kNaN;
}

/// Kendall's tau as 4 * int int C(u,v) c(u,v) du dv - 1, by nested
/// Gauss-Legendre quadrature (order 64 per panel). Outer panels are graded
/// towards the edges of the unit square; inner panels are additionally
/// graded around the diagonal and anti-diagonal through the outer node, where
/// the density of a strongly dependent copula concentrates.
inline double kendall_tau_integral(const CopulaSpec& spec) {
  validate(spec);
  static const std::vector<double> edge{0.0, 1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.05, 0.2, 0.5,
                                        0.8, 0.95, 0.99, 0.999, 0.9999, 0.99999, 0.999999, 1.0};
  static const std::vector<double> offsets{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 0.03, 0.1, 0.3};
  const auto& rule = special::gauss_legendre_64();
  auto integrate = [&](const std::vector<double>& breaks, auto&& f) {
    double sum = 0.0;
    for (std::size_t p = 0; p + 1 < breaks.size(); ++p) {
      const double half = 0.5 * (breaks[p + 1] - breaks[p]);
      if (half <= 0.0) continue;
      const double mid = 0.5 * (breaks[p + 1] + breaks[p]);
      double part = 0.0;
      for (std::size_t i = 0; i < rule.nodes.size(); ++i) part += rule.weights[i] * f(mid + half * rule.nodes[i]);
      sum += half * part;
    }
    return sum;
  };
  std::vector<double> inner;
  const double total = integrate(edge, [&](double u) {
    inner = edge;
    for (double d : offsets) {
      for (double c : {u - d, u + d, 1.0 - u - d, 1.0 - u + d}) {
        if (c > 0.0 && c < 1.0) inner.push_back(c);
      }
    }
    inner.push_back(u);
    inner.push_back(1.0 - u);
    std::sort(inner.begin(), inner.end());
    inner.erase(std::unique(inner.begin(), inner.end()), inner.end());
    return integrate(inner, [&](double v) {
      return detail::cdf_unchecked(spec, u, v) * detail::density_unchecked(spec, u, v);
    });
  });
  return 4.0 * total - 1.0;
}

struct TauRange {
  double lo;
  double hi;
};

/// Open interval of attainable Kendall's tau (independence: the single point 0).
inline TauRange tau_range(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::independence: return {0.0, 0.0};
    case CopulaFamily::frank:
    case CopulaFamily::gaussian: return {-1.0, 1.0};
    case CopulaFamily::gumbel:
    case CopulaFamily::joe:
    case CopulaFamily::clayton180: return {0.0, 1.0};
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton270: return {-1.0, 0.0};
  }
  return {0.0, 0.0};
}

/// Copula parameter with the given Kendall's tau.
inline double theta_from_tau(CopulaFamily family, double tau) {
  const auto range = tau_range(family);
  auto unattainable = [&] {
    return DomainError("Kendall's tau " + std::to_string(tau) + " not attainable by the " +
                       std::string(to_string(family)) + " copula (range [" + std::to_string(range.lo) + ", " +
                       std::to_string(range.hi) + "))");
  };
  if (!std::isfinite(tau)) throw unattainable();
  switch (family) {
    case CopulaFamily::independence:
      if (tau != 0.0) throw unattainable();
      return 0.0;
    case CopulaFamily::gumbel:
      if (!(tau >= 0.0 && tau < 1.0)) throw unattainable();
      return 1.0 / (1.0 - tau);
    case CopulaFamily::clayton180:
      if (!(tau > 0.0 && tau < 1.0)) throw unattainable();
      return 2.0 * tau / (1.0 - tau);
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton270:
      if (!(tau < 0.0 && tau > -1.0)) throw unattainable();
      return -2.0 * tau / (1.0 + tau);
    case CopulaFamily::gaussian:
      if (!(tau > -1.0 && tau < 1.0)) throw unattainable();
      return std::sin(std::numbers::pi * tau / 2.0);
    case CopulaFamily::frank:
    case CopulaFamily::joe: {
      if (family == CopulaFamily::frank && !(tau > -1.0 && tau < 1.0)) throw unattainable();
      if (family == CopulaFamily::joe && !(tau >= 0.0 && tau < 1.0)) throw unattainable();
      if (tau == 0.0) return family == CopulaFamily::frank ? 0.0 : 1.0;
      // Monotone bracketing then bisection on the closed form.
      const double target = std::abs(tau);
      const double lo_start = family == CopulaFamily::frank ? 0.0 : 1.0;
      auto tau_at = [&](double th) { return std::abs(kendall_tau({family, th})); };
      double lo = lo_start;
      double hi = lo_start + 1.0;
      while (tau_at(hi) < target) {
        lo = hi;
        hi = lo_start + 2.0 * (hi - lo_start);
        if (hi > 1e12) throw unattainable();
      }
      for (int iter = 0; iter < 200 && hi - lo > 1e-15 * hi; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (tau_at(mid) < target) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double th = 0.5 * (lo + hi);
      return (family == CopulaFamily::frank && tau < 0.0) ? -th : th;
    }
  }
  throw unattainable();
}

// ---- Sampling ----------------------------------------------------------------

/// v such that h_c_given_t(v | u) = w, by bisection (at most 200 steps).
inline double h_c_given_t_inverse_bisection(const CopulaSpec& spec, double w, double u) {
  double lo = 0.0;
  double hi = 1.0;
  for (int iter = 0; iter < 200 && hi - lo > 1e-14; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (detail::h_c_given_t_unchecked(spec, mid, u).h < w) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

/// v such that h_c_given_t(v | u) = w; closed form where the family allows.
inline double h_c_given_t_inverse(const CopulaSpec& spec, double w, double u) {
  validate(spec);
  const double th = spec.theta;
  const double uc = detail::clamp_unit(u);
  const double wc = detail::clamp_unit(w);
  switch (detail::effective_family(spec)) {
    case CopulaFamily::independence: return w;
    case CopulaFamily::frank: return detail::frank_h_inverse(wc, uc, th);
    case CopulaFamily::gaussian: return detail::gaussian_h_inverse(wc, uc, th);
    case CopulaFamily::clayton90: return detail::clayton_h_inverse(wc, 1.0 - uc, th);
    case CopulaFamily::clayton180: return 1.0 - detail::clayton_h_inverse(1.0 - wc, 1.0 - uc, th);
    case CopulaFamily::clayton270: return 1.0 - detail::clayton_h_inverse(1.0 - wc, uc, th);
    default: return h_c_given_t_inverse_bisection(spec, w, u);
  }
}

/// One draw (u, v) from the copula by conditional inversion.
inline std::pair<double, double> sample_pair(const CopulaSpec& spec, Rng& rng) {
  const double u = rng.uniform();
  const double w = rng.uniform();
  if (detail::effective_family(spec) == CopulaFamily::independence) return {u, w};
  const double v = std::clamp(h_c_given_t_inverse(spec, w, u), kUnitClamp, 1.0 - kUnitClamp);
  return {u, v};
}

}  // namespace cure_copula
