#pragma once

// Small statistics used as test oracles.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>
#include <vector>

namespace test_support {

/// Sample Kendall's tau (no ties) in O(n log n): sort by x, count inversions in y.
inline double sample_kendall_tau(std::vector<std::pair<double, double>> xy) {
  std::sort(xy.begin(), xy.end());
  std::vector<double> y(xy.size());
  for (std::size_t i = 0; i < xy.size(); ++i) y[i] = xy[i].second;
  std::vector<double> buf(y.size());
  std::uint64_t inversions = 0;
  for (std::size_t width = 1; width < y.size(); width *= 2) {
    for (std::size_t lo = 0; lo < y.size(); lo += 2 * width) {
      const std::size_t mid = std::min(lo + width, y.size());
      const std::size_t hi = std::min(lo + 2 * width, y.size());
      std::size_t i = lo;
      std::size_t j = mid;
      std::size_t k = lo;
      while (i < mid && j < hi) {
        if (y[i] <= y[j]) {
          buf[k++] = y[i++];
        } else {
          inversions += mid - i;
          buf[k++] = y[j++];
        }
      }
      while (i < mid) buf[k++] = y[i++];
      while (j < hi) buf[k++] = y[j++];
    }
    std::swap(y, buf);
  }
  const double n = static_cast<double>(xy.size());
  const double pairs = n * (n - 1.0) / 2.0;
  return 1.0 - 2.0 * static_cast<double>(inversions) / pairs;
}

/// Kolmogorov-Smirnov statistic of a sample against U(0,1).
inline double ks_uniform_statistic(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const double n = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    d = std::max({d, (static_cast<double>(i) + 1.0) / n - x[i], x[i] - static_cast<double>(i) / n});
  }
  return d;
}

/// Asymptotic p-value of sqrt(n) D under the null.
inline double ks_p_value(double d, std::size_t n) {
  const double x = std::sqrt(static_cast<double>(n)) * d;
  if (x < 0.2) return 1.0;
  double s = 0.0;
  for (int k = 1; k <= 100; ++k) s += (k % 2 ? 2.0 : -2.0) * std::exp(-2.0 * k * k * x * x);
  return std::clamp(s, 0.0, 1.0);
}

}  // namespace test_support

#include "cure_copula/copulas.hpp"

namespace test_support {

/// Five Kendall's tau values spanning the attainable range of a family.
inline std::vector<double> tau_grid(cure_copula::CopulaFamily f) {
  using cure_copula::CopulaFamily;
  switch (f) {
    case CopulaFamily::independence: return {0.0};
    case CopulaFamily::frank:
    case CopulaFamily::gaussian: return {-0.8, -0.3, 0.2, 0.5, 0.9};
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton270: return {-0.9, -0.7, -0.5, -0.3, -0.1};
    default: return {0.1, 0.3, 0.5, 0.7, 0.9};
  }
}

inline std::vector<cure_copula::CopulaSpec> spec_grid(cure_copula::CopulaFamily f) {
  std::vector<cure_copula::CopulaSpec> out;
  for (double tau : tau_grid(f)) out.push_back({f, cure_copula::theta_from_tau(f, tau)});
  return out;
}

}  // namespace test_support

#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace test_support {

/// int_0^1 int_0^1 c(u, v) dv du by nested adaptive Gauss-Kronrod; the inner
/// range is split at the diagonal and anti-diagonal through u.
inline double density_mass(const cure_copula::CopulaSpec& spec) {
  using boost::math::quadrature::gauss_kronrod;
  auto inner = [&](double u) {
    std::vector<double> cuts{0.0, 1.0, u, 1.0 - u};
    std::sort(cuts.begin(), cuts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
      if (cuts[i + 1] - cuts[i] <= 0.0) continue;
      s += gauss_kronrod<double, 31>::integrate(
          [&](double v) { return cure_copula::copula_density(spec, u, v); }, cuts[i], cuts[i + 1], 12, 1e-11);
    }
    return s;
  };
  return gauss_kronrod<double, 31>::integrate(inner, 0.0, 0.5, 12, 1e-10) +
         gauss_kronrod<double, 31>::integrate(inner, 0.5, 1.0, 12, 1e-10);
}

}  // namespace test_support
