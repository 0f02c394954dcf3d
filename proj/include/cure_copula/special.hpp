#pragma once

// Special functions shared by the marginal and copula families.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace cure_copula::special {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

inline double normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi);
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::numbers::sqrt2); }

/// Inverse standard normal CDF. Acklam's rational approximation followed by
/// one Halley step; absolute error well below 1e-12 on (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0)) return p == 0.0 ? -kInf : kNaN;
  if (!(p < 1.0)) return p == 1.0 ? kInf : kNaN;

  static constexpr std::array<double, 6> a{-3.969683028665376e+01, 2.209460984245205e+02,
                                           -2.759285104469687e+02, 1.383577518672690e+02,
                                           -3.066479806614716e+01, 2.506628277459239e+00};
  static constexpr std::array<double, 5> b{-5.447609879822406e+01, 1.615858368580409e+02,
                                           -1.556989798598866e+02, 6.680131188771972e+01,
                                           -1.328068155288572e+01};
  static constexpr std::array<double, 6> c{-7.784894002430293e-03, -3.223964580411365e-01,
                                           -2.400758277161838e+00, -2.549732539343734e+00,
                                           4.374664141464968e+00,  2.938163982698783e+00};
  static constexpr std::array<double, 4> d{7.784695709041462e-03, 3.224671290700398e-01,
                                           2.445134137142996e+00, 3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement. In the upper tail work with the complement to keep
  // relative accuracy.
  if (p > 0.5) {
    const double e = 0.5 * std::erfc(x / std::numbers::sqrt2) - (1.0 - p);
    const double u = -e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  } else {
    const double e = normal_cdf(x) - p;
    const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(0.5 * x * x);
    x = x - u / (1.0 + 0.5 * x * u);
  }
  return x;
}

/// Regularized lower incomplete gamma P(s, x) = gamma(s, x) / Gamma(s).
/// Series expansion for x < s + 1, Lentz continued fraction otherwise.
inline double gamma_p(double s, double x) {
  if (x <= 0.0) return 0.0;
  if (std::isinf(x)) return 1.0;
  constexpr double eps = 1e-16;
  constexpr int max_iter = 100000;
  const double log_prefactor = s * std::log(x) - x - std::lgamma(s);
  if (x < s + 1.0) {
    double ap = s;
    double del = 1.0 / s;
    double sum = del;
    for (int n = 0; n < max_iter; ++n) {
      ap += 1.0;
      del *= x / ap;
      sum += del;
      if (std::abs(del) < std::abs(sum) * eps) break;
    }
    return std::min(1.0, sum * std::exp(log_prefactor));
  }
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - s;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < max_iter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < eps) break;
  }
  return std::max(0.0, 1.0 - std::exp(log_prefactor) * h);
}

inline double digamma(double x) {
  double result = 0.0;
  while (x < 10.0) {
    result -= 1.0 / x;
    x += 1.0;
  }
  const double inv = 1.0 / x;
  const double inv2 = inv * inv;
  result += std::log(x) - 0.5 * inv -
            inv2 * (1.0 / 12 -
                    inv2 * (1.0 / 120 -
                            inv2 * (1.0 / 252 -
                                    inv2 * (1.0 / 240 - inv2 * (1.0 / 132 - inv2 * (691.0 / 32760 - inv2 / 12.0))))));
  return result;
}

struct QuadratureRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

/// Gauss-Legendre rule of order n on [-1, 1] (Newton iteration on P_n).
inline QuadratureRule gauss_legendre(int n) {
  QuadratureRule rule;
  rule.nodes.resize(static_cast<std::size_t>(n));
  rule.weights.resize(static_cast<std::size_t>(n));
  const int m = (n + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p1 = 1.0;
      double p2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j + 1.0) * z * p2 - j * p3) / (j + 1.0);
      }
      pp = n * (z * p1 - p2) / (z * z - 1.0);
      const double z1 = z;
      z = z1 - p1 / pp;
      if (std::abs(z - z1) < 1e-15) break;
    }
    const auto lo = static_cast<std::size_t>(i);
    const auto hi = static_cast<std::size_t>(n - 1 - i);
    rule.nodes[lo] = -z;
    rule.nodes[hi] = z;
    rule.weights[lo] = 2.0 / ((1.0 - z * z) * pp * pp);
    rule.weights[hi] = rule.weights[lo];
  }
  return rule;
}

inline const QuadratureRule& gauss_legendre_64() {
  static const QuadratureRule rule = gauss_legendre(64);
  return rule;
}

/// Debye function of order one, D1(x) = (1/x) * int_0^x t / (e^t - 1) dt.
inline double debye1(double x) {
  if (x == 0.0) return 1.0;
  if (x < 0.0) return debye1(-x) - 0.5 * x;
  if (x <= 10.0) {
    const auto& rule = gauss_legendre_64();
    double sum = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i) {
      const double t = 0.5 * x * (rule.nodes[i] + 1.0);
      sum += rule.weights[i] * t / std::expm1(t);
    }
    return 0.5 * sum;  // (x/2) * sum / x
  }
  // int_0^x t/(e^t-1) dt = pi^2/6 - sum_k e^{-kx} (x/k + 1/k^2)
  double tail = 0.0;
  for (int k = 1; k < 1000; ++k) {
    const double term = std::exp(-k * x) * (x / k + 1.0 / (static_cast<double>(k) * k));
    tail += term;
    if (term < 1e-18) break;
  }
  return (std::numbers::pi * std::numbers::pi / 6.0 - tail) / x;
}

/// P(X > h, Y > k) for a standard bivariate normal with correlation r
/// (Genz's BVND, adapted from Drezner & Wesolowsky).
inline double bivariate_normal_upper(double h, double k, double r) {
  struct Rules {
    std::array<std::vector<double>, 3> x;
    std::array<std::vector<double>, 3> w;
  };
  // Half-rules of the 6, 12 and 20 point Gauss-Legendre formulas.
  static const Rules rules = [] {
    Rules out;
    const std::array<int, 3> orders{6, 12, 20};
    for (std::size_t g = 0; g < 3; ++g) {
      const auto full = gauss_legendre(orders[g]);
      for (std::size_t i = 0; i < full.nodes.size() / 2; ++i) {
        out.x[g].push_back(full.nodes[i]);
        out.w[g].push_back(full.weights[i]);
      }
    }
    return out;
  }();
  constexpr double two_pi = 2.0 * std::numbers::pi;

  std::size_t ng;
  if (std::abs(r) < 0.3) {
    ng = 0;
  } else if (std::abs(r) < 0.75) {
    ng = 1;
  } else {
    ng = 2;
  }
  const auto& xs_rule = rules.x[ng];
  const auto& ws_rule = rules.w[ng];
  const std::size_t lg = xs_rule.size();

  double hk = h * k;
  double bvn = 0.0;
  if (std::abs(r) < 0.925) {
    const double hs = 0.5 * (h * h + k * k);
    const double asr = std::asin(r);
    for (std::size_t i = 0; i < lg; ++i) {
      double sn = std::sin(asr * (xs_rule[i] + 1.0) / 2.0);
      bvn += ws_rule[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
      sn = std::sin(asr * (-xs_rule[i] + 1.0) / 2.0);
      bvn += ws_rule[i] * std::exp((sn * hk - hs) / (1.0 - sn * sn));
    }
    return bvn * asr / (2.0 * two_pi) + normal_cdf(-h) * normal_cdf(-k);
  }

  if (r < 0.0) {
    k = -k;
    hk = -hk;
  }
  if (std::abs(r) < 1.0) {
    const double as = (1.0 - r) * (1.0 + r);
    double a = std::sqrt(as);
    const double bs = (h - k) * (h - k);
    const double c = (4.0 - hk) / 8.0;
    const double d = (12.0 - hk) / 16.0;
    bvn = a * std::exp(-(bs / as + hk) / 2.0) *
          (1.0 - c * (bs - as) * (1.0 - d * bs / 5.0) / 3.0 + c * d * as * as / 5.0);
    if (hk > -160.0) {
      const double b = std::sqrt(bs);
      bvn -= std::exp(-hk / 2.0) * std::sqrt(two_pi) * normal_cdf(-b / a) * b *
             (1.0 - c * bs * (1.0 - d * bs / 5.0) / 3.0);
    }
    a /= 2.0;
    for (std::size_t i = 0; i < lg; ++i) {
      for (const double sign : {-1.0, 1.0}) {
        const double xs = std::pow(a * (sign * xs_rule[i] + 1.0), 2);
        const double rs = std::sqrt(1.0 - xs);
        const double asr = -(bs / xs + hk) / 2.0;
        if (asr > -100.0) {
          bvn += a * ws_rule[i] * std::exp(asr) *
                 (std::exp(-hk * (1.0 - rs) / (2.0 * (1.0 + rs))) / rs - (1.0 + c * xs * (1.0 + d * xs)));
        }
      }
    }
    bvn = -bvn / two_pi;
  }
  if (r > 0.0) {
    bvn += normal_cdf(-std::max(h, k));
  } else {
    bvn = -bvn;
    if (k > h) {
      if (h < 0.0) {
        bvn += normal_cdf(k) - normal_cdf(h);
      } else {
        bvn += normal_cdf(-h) - normal_cdf(-k);
      }
    }
  }
  return bvn;
}

/// P(X <= x, Y <= y) for a standard bivariate normal with correlation r.
inline double bivariate_normal_cdf(double x, double y, double r) {
  if (x == -kInf || y == -kInf) return 0.0;
  if (x == kInf) return normal_cdf(y);
  if (y == kInf) return normal_cdf(x);
  return std::clamp(bivariate_normal_upper(-x, -y, r), 0.0, 1.0);
}

}  // namespace cure_copula::special
