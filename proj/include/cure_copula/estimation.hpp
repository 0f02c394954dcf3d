#pragma once

// Multi-start maximum likelihood for the cure model.
//
// Optimization runs in an unconstrained space:
//   [theta*, U1*, U2*, C1*, C2*, logit p]   (theta* absent for independence)
// with log for positive parameters, identity for the log-normal mu, and
//   frank: theta   gumbel/joe: log(theta - 1)   clayton*: log(theta)
//   gaussian: atanh(theta)

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "cure_copula/copulas.hpp"
#include "cure_copula/cure_model.hpp"
#include "cure_copula/error.hpp"
#include "cure_copula/marginals.hpp"
#include "cure_copula/nelder_mead.hpp"
#include "cure_copula/parallel.hpp"
#include "cure_copula/rng.hpp"

namespace cure_copula {

// ---- Transforms --------------------------------------------------------------

inline double logit(double p) { return std::log(p) - std::log1p(-p); }
inline double inv_logit(double x) { return x >= 0.0 ? 1.0 / (1.0 + std::exp(-x)) : std::exp(x) / (1.0 + std::exp(x)); }

inline double theta_to_free(CopulaFamily family, double theta) {
  switch (family) {
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return std::log(theta - 1.0);
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton180:
    case CopulaFamily::clayton270: return std::log(theta);
    case CopulaFamily::gaussian: return std::atanh(theta);
    default: return theta;
  }
}

inline double theta_from_free(CopulaFamily family, double x) {
  switch (family) {
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return 1.0 + std::exp(x);
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton180:
    case CopulaFamily::clayton270: return std::exp(x);
    case CopulaFamily::gaussian: return std::tanh(x);
    default: return x;
  }
}

inline double margin_to_free(MarginalFamily family, int index, double value) {
  return (family == MarginalFamily::lognormal && index == 1) ? value : std::log(value);
}

inline double margin_from_free(MarginalFamily family, int index, double x) {
  return (family == MarginalFamily::lognormal && index == 1) ? x : std::exp(x);
}

inline std::size_t free_dimension(const ModelSpec& model) { return has_parameter(model.copula) ? 6 : 5; }

inline std::vector<double> to_free(const ModelSpec& model, const ParamVector& a) {
  std::vector<double> x;
  x.reserve(6);
  if (has_parameter(model.copula)) x.push_back(theta_to_free(model.copula, a.theta));
  x.push_back(margin_to_free(model.latency.family, 0, a.latency.first));
  x.push_back(margin_to_free(model.latency.family, 1, a.latency.second));
  x.push_back(margin_to_free(model.censoring.family, 0, a.censoring.first));
  x.push_back(margin_to_free(model.censoring.family, 1, a.censoring.second));
  x.push_back(logit(a.p));
  return x;
}

inline ParamVector from_free(const ModelSpec& model, const std::vector<double>& x) {
  ParamVector a;
  std::size_t k = 0;
  a.theta = has_parameter(model.copula) ? theta_from_free(model.copula, x[k++]) : 0.0;
  a.latency.first = margin_from_free(model.latency.family, 0, x[k++]);
  a.latency.second = margin_from_free(model.latency.family, 1, x[k++]);
  a.censoring.first = margin_from_free(model.censoring.family, 0, x[k++]);
  a.censoring.second = margin_from_free(model.censoring.family, 1, x[k++]);
  a.p = inv_logit(x[k]);
  return a;
}

/// Natural-scale parameters in the same order as the free vector.
inline std::vector<double> to_natural_vector(const ModelSpec& model, const ParamVector& a) {
  std::vector<double> x;
  if (has_parameter(model.copula)) x.push_back(a.theta);
  x.insert(x.end(), {a.latency.first, a.latency.second, a.censoring.first, a.censoring.second, a.p});
  return x;
}

inline ParamVector from_natural_vector(const ModelSpec& model, const std::vector<double>& x) {
  ParamVector a;
  std::size_t k = 0;
  a.theta = has_parameter(model.copula) ? x[k++] : 0.0;
  a.latency = {x[k], x[k + 1]};
  a.censoring = {x[k + 2], x[k + 3]};
  a.p = x[k + 4];
  return a;
}

/// Open bounds of each natural-scale coordinate.
inline std::vector<std::pair<double, double>> natural_bounds(const ModelSpec& model) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<std::pair<double, double>> b;
  switch (model.copula) {
    case CopulaFamily::independence: break;
    case CopulaFamily::frank: b.emplace_back(-inf, inf); break;
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: b.emplace_back(1.0, inf); break;
    case CopulaFamily::gaussian: b.emplace_back(-1.0, 1.0); break;
    default: b.emplace_back(0.0, inf);
  }
  auto margin = [&](MarginalFamily f) {
    b.emplace_back(0.0, inf);
    b.emplace_back(f == MarginalFamily::lognormal ? -inf : 0.0, inf);
  };
  margin(model.latency.family);
  margin(model.censoring.family);
  b.emplace_back(0.0, 1.0);
  return b;
}

/// Coordinate names matching to_natural_vector.
inline std::vector<std::string> natural_names(const ModelSpec& model) {
  std::vector<std::string> names;
  if (has_parameter(model.copula)) names.emplace_back("theta");
  for (auto n : parameter_names(model.latency.family)) names.push_back("latency_" + std::string(n));
  for (auto n : parameter_names(model.censoring.family)) names.push_back("censoring_" + std::string(n));
  names.emplace_back("p");
  return names;
}

// ---- Truncation rule ---------------------------------------------------------

struct TruncationRule {
  enum class Kind { none, last_uncensored, fixed };
  Kind kind = Kind::none;
  double value = 0.0;

  bool operator==(const TruncationRule&) const = default;
};

inline double last_uncensored_time(const Dataset& data) {
  double best = -1.0;
  for (const auto& r : data) {
    if (r.delta == 1) best = std::max(best, r.y);
  }
  if (best <= 0.0) throw UsageError("no uncensored observation to place the truncation point");
  return best;
}

inline std::optional<double> resolve_truncation(const TruncationRule& rule, const Dataset& data) {
  switch (rule.kind) {
    case TruncationRule::Kind::none: return std::nullopt;
    case TruncationRule::Kind::last_uncensored: return last_uncensored_time(data);
    case TruncationRule::Kind::fixed:
      if (!(std::isfinite(rule.value) && rule.value > 0.0)) {
        throw UsageError("truncation point must be finite and strictly positive");
      }
      return rule.value;
  }
  return std::nullopt;
}

// ---- Options and results -----------------------------------------------------

struct FitOptions {
  /// Kendall's tau starting grid; empty selects the family default.
  std::vector<double> tau_grid;
  int n_perturbations = 9;
  std::uint64_t seed = 0;
  NelderMeadOptions optimizer{};
  /// Evaluations per start in the screening pass; 0 runs the full search from every start.
  int screen_evals = 200;
  /// Number of best screened starts refined with the full search.
  int refine_top = 5;
  std::int64_t max_underflows = 0;
  /// The search is confined to |tau| <= max_abs_tau. Near |tau| = 1 with
  /// coinciding margins the likelihood has non-identified ridges.
  double max_abs_tau = 0.99;
  bool compute_se = true;
  unsigned threads = 1;
};

struct StandardErrors {
  bool available = false;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  /// Natural-scale SEs in to_natural_vector order.
  std::vector<double> natural;
  double tau = std::numeric_limits<double>::quiet_NaN();

  bool operator==(const StandardErrors&) const = default;
};

struct FitResult {
  ModelSpec model;
  ParamVector alpha_hat;
  double tau_hat = 0.0;
  double loglik = -std::numeric_limits<double>::infinity();
  bool converged = false;
  StandardErrors se;
  int n_starts = 0;
  int n_converged = 0;
  /// Index into the starting values; n_starts is the nesting start and
  /// n_starts + 1 the search with theta pinned at independence.
  int best_start_index = -1;
  std::int64_t underflow_count = 0;
  std::int64_t evaluations = 0;
  std::size_t n_records = 0;
  std::uint64_t data_checksum = 0;
};

/// FNV-1a over the raw bytes of each record; identifies the input data.
inline std::uint64_t data_checksum(const Dataset& data) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  for (const auto& r : data) {
    mix(&r.y, sizeof r.y);
    const std::int32_t d = r.delta;
    mix(&d, sizeof d);
  }
  return h;
}

// ---- Starting values ---------------------------------------------------------

/// Weibull maximum likelihood on complete (uncensored) data; returns (scale, shape).
inline MarginalParams weibull_pilot(const std::vector<double>& t) {
  if (t.empty()) throw UsageError("Weibull pilot needs at least one observation");
  double mean_log = 0.0;
  for (double x : t) mean_log += std::log(x);
  mean_log /= static_cast<double>(t.size());
  const auto [mn, mx] = std::minmax_element(t.begin(), t.end());
  if (t.size() < 2 || *mx - *mn <= 1e-12 * *mx) {
    double mean = std::accumulate(t.begin(), t.end(), 0.0) / static_cast<double>(t.size());
    return {mean, 1.0};
  }
  // Profile score in k, increasing: sum t^k log t / sum t^k - 1/k - mean log t.
  auto score = [&](double k) {
    double s0 = 0.0;
    double s1 = 0.0;
    for (double x : t) {
      const double lx = std::log(x);
      const double w = std::exp(k * (lx - std::log(*mx)));
      s0 += w;
      s1 += w * lx;
    }
    return s1 / s0 - 1.0 / k - mean_log;
  };
  double lo = 1e-3;
  double hi = 1.0;
  while (score(hi) < 0.0 && hi < 1e4) {
    lo = hi;
    hi *= 2.0;
  }
  for (int iter = 0; iter < 200 && hi - lo > 1e-12 * hi; ++iter) {
    const double mid = 0.5 * (lo + hi);
    if (score(mid) < 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double k = 0.5 * (lo + hi);
  double s = 0.0;
  for (double x : t) s += std::exp(k * (std::log(x) - std::log(*mx)));
  const double scale = *mx * std::pow(s / static_cast<double>(t.size()), 1.0 / k);
  return {scale, k};
}

/// Converts Weibull(scale, shape) into the target family by matching moments
/// (median and interquartile ratio for the log-logistic).
inline MarginalParams moment_match(const MarginalParams& weibull, MarginalFamily target) {
  const double lambda = weibull.first;
  const double k = weibull.second;
  const double m = lambda * std::tgamma(1.0 + 1.0 / k);
  const double v = lambda * lambda * std::tgamma(1.0 + 2.0 / k) - m * m;
  switch (target) {
    case MarginalFamily::weibull: return weibull;
    case MarginalFamily::lognormal: {
      const double s2 = std::log1p(v / (m * m));
      return {std::sqrt(s2), std::log(m) - 0.5 * s2};
    }
    case MarginalFamily::gamma: return {v / m, m * m / v};
    case MarginalFamily::loglogistic: {
      auto q = [&](double level) { return lambda * std::pow(-std::log1p(-level), 1.0 / k); };
      return {q(0.5), std::log(9.0) / std::log(q(0.75) / q(0.25))};
    }
  }
  return weibull;
}

inline std::vector<double> default_tau_grid(CopulaFamily family) {
  std::vector<double> pos;
  for (int i = 1; i <= 9; ++i) pos.push_back(i / 10.0);
  std::vector<double> neg;
  for (double x : pos) neg.push_back(-x);
  switch (family) {
    case CopulaFamily::independence: return {0.0};
    case CopulaFamily::frank:
    case CopulaFamily::gaussian: {
      auto all = pos;
      all.insert(all.end(), neg.begin(), neg.end());
      return all;
    }
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton270: return neg;
    default: return pos;
  }
}

/// Starting vectors: (1 + n_perturbations) marginal/incidence vectors crossed
/// with the Kendall's tau grid, ordered marginal-major.
inline std::vector<ParamVector> starting_values(const Dataset& data, const ModelSpec& model, const FitOptions& opts) {
  validate(model);
  if (opts.n_perturbations < 0) throw UsageError("n_perturbations must be nonnegative");
  std::vector<double> events;
  std::vector<double> censored;
  for (const auto& r : data) (r.delta == 1 ? events : censored).push_back(r.y);
  if (events.empty() || censored.empty()) {
    throw UsageError("starting values need both censored and uncensored observations");
  }
  const double last_event = *std::max_element(events.begin(), events.end());
  const double below = static_cast<double>(
      std::count_if(data.begin(), data.end(), [&](const Record& r) { return r.y <= last_event; }));
  const double p0 = std::clamp(below / static_cast<double>(data.size()), 0.01, 0.99);

  const MarginalParams u0 = moment_match(weibull_pilot(events), model.latency.family);
  const MarginalParams c0 = moment_match(weibull_pilot(censored), model.censoring.family);

  std::vector<double> grid = opts.tau_grid.empty() ? default_tau_grid(model.copula) : opts.tau_grid;
  if (!has_parameter(model.copula)) grid = {0.0};
  std::vector<double> thetas;
  for (double tau : grid) thetas.push_back(has_parameter(model.copula) ? theta_from_tau(model.copula, tau) : 0.0);

  Rng rng(opts.seed);
  std::vector<ParamVector> out;
  out.reserve(static_cast<std::size_t>(opts.n_perturbations + 1) * thetas.size());
  for (int j = 0; j <= opts.n_perturbations; ++j) {
    const double w = j == 0 ? 1.0 : rng.uniform(0.5, 1.5);
    const MarginalParams uj{u0.first * w, u0.second * w};
    const MarginalParams cj{c0.first * w, c0.second * w};
    const double pj = std::clamp(std::pow(p0, w), 0.01, 0.99);
    for (double th : thetas) out.push_back({th, uj, cj, pj});
  }
  return out;
}

// ---- Standard errors ---------------------------------------------------------

struct HessianSe {
  bool available = false;
  double min_eigenvalue = std::numeric_limits<double>::quiet_NaN();
  std::vector<double> se;
  Eigen::MatrixXd covariance;
};

/// Standard errors from the observed information -H of a log-likelihood f at
/// its maximizer x. Central differences with step max(1e-4|x|, 1e-5), shrunk to
/// stay inside the open bounds.
template <class F>
HessianSe observed_information_se(F&& f, const std::vector<double>& x,
                                  const std::vector<std::pair<double, double>>& bounds) {
  const std::size_t n = x.size();
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) {
    double step = std::max(1e-4 * std::abs(x[i]), 1e-5);
    const auto [lo, hi] = bounds.empty() ? std::pair{-HUGE_VAL, HUGE_VAL} : bounds[i];
    step = std::min({step, 0.5 * (x[i] - lo), 0.5 * (hi - x[i])});
    h[i] = step;
  }
  HessianSe out;
  if (std::any_of(h.begin(), h.end(), [](double s) { return !(s > 0.0); })) return out;
  auto at = [&](std::size_t i, double di, std::size_t j, double dj) {
    std::vector<double> y = x;
    y[i] += di;
    y[j] += dj;
    return f(y);
  };
  const double f0 = f(x);
  Eigen::MatrixXd hess(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> yp = x;
    std::vector<double> ym = x;
    yp[i] += h[i];
    ym[i] -= h[i];
    hess(i, i) = (f(yp) - 2.0 * f0 + f(ym)) / (h[i] * h[i]);
    for (std::size_t j = 0; j < i; ++j) {
      const double v = (at(i, h[i], j, h[j]) - at(i, h[i], j, -h[j]) - at(i, -h[i], j, h[j]) +
                        at(i, -h[i], j, -h[j])) /
                       (4.0 * h[i] * h[j]);
      hess(i, j) = v;
      hess(j, i) = v;
    }
  }
  if (!hess.allFinite()) return out;
  const Eigen::MatrixXd info = -hess;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(info);
  if (eig.info() != Eigen::Success) return out;
  out.min_eigenvalue = eig.eigenvalues().minCoeff();
  if (!(out.min_eigenvalue > 0.0)) return out;
  const Eigen::VectorXd inv_vals = eig.eigenvalues().cwiseInverse();
  out.covariance = eig.eigenvectors() * inv_vals.asDiagonal() * eig.eigenvectors().transpose();
  out.se.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.se[i] = std::sqrt(std::max(0.0, out.covariance(i, i)));
  out.available = true;
  return out;
}

/// d tau / d theta by central differences inside the parameter domain.
inline double tau_derivative(CopulaFamily family, double theta) {
  double step = std::max(1e-4 * std::abs(theta), 1e-5);
  const auto range = natural_bounds({family, {}, {}}).front();
  step = std::min({step, 0.5 * (theta - range.first), 0.5 * (range.second - theta)});
  if (!(step > 0.0)) return std::numeric_limits<double>::quiet_NaN();
  return (kendall_tau({family, theta + step}) - kendall_tau({family, theta - step})) / (2.0 * step);
}

inline StandardErrors standard_errors(const FitResult& result, const Dataset& data,
                                      std::int64_t max_underflows = 0) {
  StandardErrors out;
  const ModelSpec& model = result.model;
  const auto x = to_natural_vector(model, result.alpha_hat);
  const LoglikOptions lopts{max_underflows};
  auto f = [&](const std::vector<double>& y) {
    return detail::loglik_unchecked(from_natural_vector(model, y), model, data, lopts).value;
  };
  const auto h = observed_information_se(f, x, natural_bounds(model));
  out.min_eigenvalue = h.min_eigenvalue;
  if (!h.available) return out;
  out.available = true;
  out.natural = h.se;
  out.tau = has_parameter(model.copula) ? std::abs(tau_derivative(model.copula, result.alpha_hat.theta)) * h.se[0]
                                        : std::numeric_limits<double>::quiet_NaN();
  return out;
}

// ---- Fitting -----------------------------------------------------------------

namespace detail {

struct StartOutcome {
  NelderMeadResult nm;
  int index = 0;
};

/// Kendall's tau just inside the family's range next to independence.
inline double near_independence_tau(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::frank:
    case CopulaFamily::gaussian:
    case CopulaFamily::independence: return 0.0;
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton270: return -0.01;
    default: return 0.01;
  }
}

/// theta at (or, for Clayton, next to) independence when that is a boundary
/// point of the family; nothing for Frank and Gaussian.
inline std::optional<double> boundary_independence_theta(CopulaFamily family) {
  switch (family) {
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return 1.0;
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton180:
    case CopulaFamily::clayton270: return 1e-10;
    default: return std::nullopt;
  }
}

/// theta interval whose Kendall's tau lies in [-cap, cap].
inline std::pair<double, double> theta_range_for_tau(CopulaFamily family, double cap) {
  switch (family) {
    case CopulaFamily::independence: return {0.0, 0.0};
    case CopulaFamily::frank:
    case CopulaFamily::gaussian: return {theta_from_tau(family, -cap), theta_from_tau(family, cap)};
    case CopulaFamily::gumbel:
    case CopulaFamily::joe: return {1.0, theta_from_tau(family, cap)};
    case CopulaFamily::clayton180: return {0.0, theta_from_tau(family, cap)};
    case CopulaFamily::clayton90:
    case CopulaFamily::clayton270: return {0.0, theta_from_tau(family, -cap)};
  }
  return {0.0, 0.0};
}

inline bool better(const StartOutcome& a, const StartOutcome& b) {
  if (a.nm.f != b.nm.f) return a.nm.f < b.nm.f;
  return a.index < b.index;
}

}  // namespace detail

inline FitResult fit(const Dataset& data, const ModelSpec& model, const FitOptions& opts = {}) {
  validate(model);
  validate_data(data, model, true);
  FitResult result;
  result.model = model;
  result.n_records = data.size();
  result.data_checksum = data_checksum(data);

  const auto starts = starting_values(data, model, opts);
  result.n_starts = static_cast<int>(starts.size());
  const LoglikOptions lopts{opts.max_underflows};
  if (!(opts.max_abs_tau > 0.0 && opts.max_abs_tau < 1.0)) throw UsageError("max_abs_tau must lie in (0,1)");
  const auto theta_range = detail::theta_range_for_tau(model.copula, opts.max_abs_tau);
  auto objective = [&](const std::vector<double>& x) {
    const ParamVector a = from_free(model, x);
    if (has_parameter(model.copula) && !(a.theta >= theta_range.first && a.theta <= theta_range.second)) {
      return std::numeric_limits<double>::infinity();
    }
    return -detail::loglik_unchecked(a, model, data, lopts).value;
  };

  std::vector<detail::StartOutcome> screened(starts.size());
  const bool screening = opts.screen_evals > 0;
  NelderMeadOptions screen_opts = opts.optimizer;
  if (screening) screen_opts.max_evals = opts.screen_evals;
  parallel_for(starts.size(), opts.threads, [&](std::size_t i) {
    screened[i] = {nelder_mead(objective, to_free(model, starts[i]), screen_opts), static_cast<int>(i)};
  });

  std::vector<detail::StartOutcome> finals;
  if (screening) {
    std::vector<detail::StartOutcome> order = screened;
    std::stable_sort(order.begin(), order.end(), detail::better);
    const std::size_t keep = std::min<std::size_t>(order.size(), static_cast<std::size_t>(std::max(1, opts.refine_top)));
    finals.resize(keep);
    parallel_for(keep, opts.threads, [&](std::size_t r) {
      auto nm = nelder_mead(objective, order[r].nm.x, opts.optimizer);
      // A restart guards against premature collapse of the simplex.
      auto again = nelder_mead(objective, nm.x, opts.optimizer);
      again.evals += nm.evals + order[r].nm.evals;
      again.converged = again.converged && nm.converged;
      finals[r] = {again, order[r].index};
    });
    for (const auto& s : screened) result.evaluations += s.nm.evals;
    for (const auto& s : finals) result.evaluations += s.nm.evals - screened[s.index].nm.evals;
  } else {
    finals = screened;
    for (const auto& s : finals) result.evaluations += s.nm.evals;
  }

  if (has_parameter(model.copula)) {
    // Every family nests independence: also search from the best point so far
    // with theta moved next to it. Reported as start index n_starts.
    const detail::StartOutcome* lead = nullptr;
    for (const auto& s : finals) {
      if (std::isfinite(s.nm.f) && (!lead || detail::better(s, *lead))) lead = &s;
    }
    const std::vector<double> lead_x = lead ? lead->nm.x : std::vector<double>{};
    if (lead) {
      std::vector<double> x = lead_x;
      x[0] = theta_to_free(model.copula, theta_from_tau(model.copula, detail::near_independence_tau(model.copula)));
      auto nm = nelder_mead(objective, x, opts.optimizer);
      auto again = nelder_mead(objective, nm.x, opts.optimizer);
      again.evals += nm.evals;
      again.converged = again.converged && nm.converged;
      result.evaluations += again.evals;
      finals.push_back({again, static_cast<int>(starts.size())});
    }
    // Where independence is a boundary point the simplex only creeps towards
    // it, so the other parameters are also searched with theta pinned there.
    // Reported as start index n_starts + 1.
    if (const auto pinned = detail::boundary_independence_theta(model.copula); pinned && !lead_x.empty()) {
      const double x0 = theta_to_free(model.copula, *pinned);
      auto sub = [&](const std::vector<double>& y) {
        std::vector<double> x{x0};
        x.insert(x.end(), y.begin(), y.end());
        return objective(x);
      };
      NelderMeadResult bound;
      bound.f = std::numeric_limits<double>::infinity();
      const std::vector<double> pilot = to_free(model, starts[0]);
      for (const auto* from : {&lead_x, &pilot}) {
        auto nm = nelder_mead(sub, std::vector<double>(from->begin() + 1, from->end()), opts.optimizer);
        auto again = nelder_mead(sub, nm.x, opts.optimizer);
        again.evals += nm.evals;
        again.converged = again.converged && nm.converged;
        result.evaluations += again.evals;
        if (again.f < bound.f) bound = again;
      }
      bound.x.insert(bound.x.begin(), x0);
      finals.push_back({bound, static_cast<int>(starts.size()) + 1});
    }
  }

  const detail::StartOutcome* best = nullptr;
  const detail::StartOutcome* best_any = nullptr;
  for (const auto& s : finals) {
    if (!std::isfinite(s.nm.f)) continue;
    if (s.nm.converged) {
      ++result.n_converged;
      if (!best || detail::better(s, *best)) best = &s;
    }
    if (!best_any || detail::better(s, *best_any)) best_any = &s;
  }
  const detail::StartOutcome* chosen = best ? best : best_any;
  result.converged = best != nullptr;
  if (!chosen) return result;

  result.best_start_index = chosen->index;
  result.alpha_hat = from_free(model, chosen->nm.x);
  if (!has_parameter(model.copula)) result.alpha_hat.theta = 0.0;
  const auto ll = detail::loglik_unchecked(result.alpha_hat, model, data, lopts);
  result.loglik = ll.value;
  result.underflow_count = ll.underflows;
  result.tau_hat = kendall_tau(copula_of(model, result.alpha_hat));
  // No Hessian on the boundary.
  const bool pinned = chosen->index == result.n_starts + 1;
  if (opts.compute_se && result.converged && !pinned) result.se = standard_errors(result, data, opts.max_underflows);
  return result;
}

/// Median of the fitted latency distribution.
inline double latency_median(const FitResult& fit) { return median(fit.model.latency, fit.alpha_hat.latency); }

}  // namespace cure_copula
