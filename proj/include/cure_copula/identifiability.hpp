#pragma once

// Numeric diagnostics for the limit conditions behind identification of the
// cure model. Advisory only: fitting never consults them.

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "cure_copula/copulas.hpp"
#include "cure_copula/cure_model.hpp"
#include "cure_copula/marginals.hpp"
#include "cure_copula/special.hpp"

namespace cure_copula {

struct LimitTrace {
  std::vector<double> y;
  std::vector<double> value;
  double limit = std::numeric_limits<double>::quiet_NaN();  // value at the extreme grid point
  bool pass = false;
};

struct IdentifiabilityReport {
  double threshold = 1e-4;
  LimitTrace h_t_given_c_at_zero;
  LimitTrace h_t_given_c_at_infinity;
  LimitTrace h_c_given_t_at_zero;
  /// Gumbel only: log F_C(y) / log(p F_U(y)) as y -> 0.
  std::optional<LimitTrace> gumbel_ratio;
  /// Gaussian only: Phi^-1(F_C(y)) - theta Phi^-1(p F_U(y)) as y -> 0 (-inf when theta <= 0).
  std::optional<LimitTrace> gaussian_limit;
  bool pass = false;
};

inline IdentifiabilityReport check_identifiability_limits(const ModelSpec& model, const ParamVector& alpha,
                                                          double threshold = 1e-4) {
  IdentifiabilityReport rep;
  rep.threshold = threshold;
  const CopulaSpec cop = copula_of(model, alpha);
  std::vector<double> to_zero;
  std::vector<double> to_inf;
  for (int k = 2; k <= 12; ++k) {
    to_zero.push_back(quantile(model.censoring, alpha.censoring, std::pow(10.0, -k)));
    to_inf.push_back(quantile(model.censoring, alpha.censoring, 1.0 - std::pow(10.0, -k)));
  }
  auto trace = [&](const std::vector<double>& ys, auto&& fn) {
    LimitTrace t;
    t.y = ys;
    for (double y : ys) {
      const double u = alpha.p * cdf(model.latency, alpha.latency, y);
      const double v = cdf(model.censoring, alpha.censoring, y);
      t.value.push_back(fn(u, v));
    }
    t.limit = t.value.back();
    t.pass = std::abs(t.limit) < threshold;
    return t;
  };
  rep.h_t_given_c_at_zero = trace(to_zero, [&](double u, double v) { return h_t_given_c(cop, u, v); });
  rep.h_t_given_c_at_infinity = trace(to_inf, [&](double u, double v) { return h_t_given_c(cop, u, v); });
  rep.h_c_given_t_at_zero = trace(to_zero, [&](double u, double v) { return h_c_given_t(cop, v, u); });
  rep.pass = (rep.h_t_given_c_at_zero.pass || rep.h_t_given_c_at_infinity.pass) && rep.h_c_given_t_at_zero.pass;

  if (detail::effective_family(cop) == CopulaFamily::gumbel) {
    auto t = trace(to_zero, [](double u, double v) { return std::log(v) / std::log(u); });
    t.pass = std::isfinite(t.limit) && t.limit > threshold;
    rep.pass = rep.pass && t.pass;
    rep.gumbel_ratio = t;
  }
  if (cop.family == CopulaFamily::gaussian) {
    LimitTrace t;
    if (cop.theta <= 0.0) {
      t.y = to_zero;
      t.value.assign(to_zero.size(), -std::numeric_limits<double>::infinity());
      t.limit = -std::numeric_limits<double>::infinity();
      t.pass = true;
    } else {
      t = trace(to_zero, [&](double u, double v) {
        return special::normal_quantile(v) - cop.theta * special::normal_quantile(u);
      });
      // Diverging downwards along the grid.
      const auto& val = t.value;
      const std::size_t n = val.size();
      t.pass = n >= 3 && val[n - 1] < val[n - 2] && val[n - 2] < val[n - 3] && val[n - 1] < -3.0;
    }
    rep.pass = rep.pass && t.pass;
    rep.gaussian_limit = t;
  }
  return rep;
}

}  // namespace cure_copula
