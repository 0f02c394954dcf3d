#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numeric>
#include <vector>

namespace cure_copula {

struct NelderMeadOptions {
  int max_evals = 5000;
  double x_tol = 1e-6;  // simplex diameter (max-norm distance to the best vertex)
  double f_tol = 1e-8;  // spread of function values over the simplex
  double initial_step = 0.25;
};

struct NelderMeadResult {
  std::vector<double> x;
  double f = std::numeric_limits<double>::infinity();
  int evals = 0;
  bool converged = false;
};

/// Minimizes f from x0. Non-finite values (NaN, -inf included) count as +inf.
inline NelderMeadResult nelder_mead(const std::function<double(const std::vector<double>&)>& f,
                                    const std::vector<double>& x0, const NelderMeadOptions& opts = {}) {
  const std::size_t n = x0.size();
  NelderMeadResult res;
  auto eval = [&](const std::vector<double>& x) {
    ++res.evals;
    const double v = f(x);
    return (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) ? std::numeric_limits<double>::infinity()
                                                                             : v;
  };
  if (n == 0) {
    res.x = x0;
    res.f = eval(x0);
    res.converged = true;
    return res;
  }

  std::vector<std::vector<double>> simplex(n + 1, x0);
  std::vector<double> fv(n + 1);
  for (std::size_t i = 0; i < n; ++i) simplex[i + 1][i] += opts.initial_step;
  for (std::size_t i = 0; i <= n; ++i) fv[i] = eval(simplex[i]);

  std::vector<std::size_t> order(n + 1);
  std::vector<double> centroid(n), xr(n), xe(n), xc(n);
  auto point = [&](std::vector<double>& out, double coef, const std::vector<double>& worst) {
    for (std::size_t j = 0; j < n; ++j) out[j] = centroid[j] + coef * (worst[j] - centroid[j]);
  };

  while (true) {
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    {
      std::vector<std::vector<double>> s2(n + 1);
      std::vector<double> f2(n + 1);
      for (std::size_t i = 0; i <= n; ++i) {
        s2[i] = std::move(simplex[order[i]]);
        f2[i] = fv[order[i]];
      }
      simplex = std::move(s2);
      fv = std::move(f2);
    }

    double diameter = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) diameter = std::max(diameter, std::abs(simplex[i][j] - simplex[0][j]));
    }
    const double spread = fv[n] - fv[0];
    if (std::isfinite(fv[0]) && diameter < opts.x_tol && spread < opts.f_tol) {
      res.converged = true;
      break;
    }
    if (res.evals >= opts.max_evals) break;

    std::fill(centroid.begin(), centroid.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
    }
    for (auto& c : centroid) c /= static_cast<double>(n);

    point(xr, -1.0, simplex[n]);
    const double fr = eval(xr);
    if (fr < fv[0]) {
      point(xe, -2.0, simplex[n]);
      const double fe = eval(xe);
      if (fe < fr) {
        simplex[n] = xe;
        fv[n] = fe;
      } else {
        simplex[n] = xr;
        fv[n] = fr;
      }
      continue;
    }
    if (fr < fv[n - 1]) {
      simplex[n] = xr;
      fv[n] = fr;
      continue;
    }
    const bool outside = fr < fv[n];
    point(xc, outside ? -0.5 : 0.5, simplex[n]);
    const double fc = eval(xc);
    if (fc < (outside ? fr : fv[n])) {
      simplex[n] = xc;
      fv[n] = fc;
      continue;
    }
    // Shrink towards the best vertex.
    for (std::size_t i = 1; i <= n; ++i) {
      for (std::size_t j = 0; j < n; ++j) simplex[i][j] = simplex[0][j] + 0.5 * (simplex[i][j] - simplex[0][j]);
      fv[i] = eval(simplex[i]);
    }
  }
  res.x = simplex[0];
  res.f = fv[0];
  return res;
}

}  // namespace cure_copula
