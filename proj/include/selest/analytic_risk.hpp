#pragma once

// Closed-form scaled bias and risk of the linear estimators Z - cS, their
// risk-minimizing coefficients, admissible intervals, the restricted minimax
// coefficient, and the conditional-risk minimizers Psi_mu(w) with envelopes.

#include <algorithm>
#include <cmath>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "selest/constants.hpp"
#include "selest/model.hpp"
#include "selest/special_fns.hpp"

namespace selest {

struct RiskPoint {
  double mu = 0.0;
  int n = 2;
  double value = 0.0;
  std::optional<double> se;
};

struct AdmissibleInterval {
  double lo;
  double hi;
  Target target;
};

/// An upper bound that may be absent. Every finite value lies below an
/// unbounded one; the marker never turns into a floating-point infinity.
class UpperBound {
 public:
  static UpperBound finite(double v) { return UpperBound(v, false); }
  static UpperBound unbounded() { return UpperBound(0.0, true); }

  [[nodiscard]] bool is_unbounded() const noexcept { return unbounded_; }
  [[nodiscard]] double value() const {
    if (unbounded_) throw DomainError("UpperBound::value on an unbounded envelope");
    return value_;
  }
  /// true when x lies strictly above the bound
  [[nodiscard]] bool exceeded_by(double x) const noexcept { return !unbounded_ && x > value_; }

 private:
  UpperBound(double v, bool u) : value_(v), unbounded_(u) {}
  double value_;
  bool unbounded_;
};

struct PsiEnvelopes {
  double lower;
  UpperBound upper;
};

namespace detail {

inline void check_n(int n, const char* what) {
  if (n < 2) throw DomainError(std::string(what) + ": n must be >= 2");
}

// ((mu+1)/2) e^{-mu}
inline double first_tail(double mu) { return 0.5 * (mu + 1.0) * std::exp(-mu); }
// ((mu^2+3mu+3)/2) e^{-mu}
inline double second_tail(double mu) { return 0.5 * (mu * mu + 3.0 * mu + 3.0) * std::exp(-mu); }

}  // namespace detail

/// E(U) / E(U^2) of the scaled error of Z2 (best) or Z1 (worst) about the
/// selected location.
inline double moment_u(NormalizedGap mu, int n, int order, Target target) {
  detail::check_n(n, "moment_u");
  const double nd = n;
  const double sign = target == Target::Best ? 1.0 : -1.0;
  if (order == 1) return (1.0 + sign * detail::first_tail(mu)) / nd;
  if (order == 2) return (2.0 + sign * detail::second_tail(mu)) / (nd * nd);
  throw DomainError("moment_u: order must be 1 or 2");
}

inline RiskPoint risk_linear(double c, NormalizedGap mu, int n, Target target) {
  detail::check_n(n, "risk_linear");
  const double nd = n;
  const double eu2 = moment_u(mu, n, 2, target);
  const double eu = moment_u(mu, n, 1, target);
  // E(V) = 2(n-1), E(V^2) = 2(n-1)(2n-1)
  const double value = eu2 - 4.0 * (nd - 1.0) * eu * c + 2.0 * (nd - 1.0) * (2.0 * nd - 1.0) * c * c;
  return {mu.value(), n, value, std::nullopt};
}

inline double bias_linear(double c, NormalizedGap mu, int n, Target target) {
  detail::check_n(n, "bias_linear");
  return moment_u(mu, n, 1, target) - 2.0 * (n - 1.0) * c;
}

/// Coefficient minimizing risk_linear at fixed mu.
inline double cstar(NormalizedGap mu, int n, Target target) {
  detail::check_n(n, "cstar");
  const double nd = n;
  return moment_u(mu, n, 1, target) / (2.0 * nd - 1.0);
}

inline AdmissibleInterval admissible_interval(int n, Target target) {
  const auto k = constants(n);
  if (target == Target::Best) return {k.k2, k.k3, target};
  return {k.k0, k.k2, target};
}

/// sup over mu >= 0 of risk_linear(c, mu, n, target), from the sign of
/// dR/dmu = ∓ mu e^{-mu}/(2n^2) (mu - mu0), mu0 = 4n(n-1)c - 1.
inline double sup_risk_linear(double c, int n, Target target) {
  detail::check_n(n, "sup_risk_linear");
  const double nd = n;
  const double at_infinity = 2.0 * (nd - 1.0) * (2.0 * nd - 1.0) * c * c - 4.0 * (nd - 1.0) / nd * c + 2.0 / (nd * nd);
  const double mu0 = 4.0 * nd * (nd - 1.0) * c - 1.0;
  if (target == Target::Best) return risk_linear(c, NormalizedGap(std::max(mu0, 0.0)), n, target).value;
  return std::max(risk_linear(c, NormalizedGap(0.0), n, target).value, at_infinity);
}

/// d/dc of the best-target supremum risk on [k2, k3]; its root is r_n.
inline double minimax_equation(double r, int n) {
  detail::check_n(n, "minimax_equation");
  const double nd = n;
  return 4.0 * (nd - 1.0) * (2.0 * nd - 1.0) * r -
         8.0 * (nd - 1.0) * (nd - 1.0) * r * std::exp(-(4.0 * nd * (nd - 1.0) * r - 1.0)) - 4.0 * (nd - 1.0) / nd;
}

namespace detail {

inline double solve_minimax_best(int n) {
  const auto k = constants(n);
  try {
    return find_root([n](double r) { return minimax_equation(r, n); }, Bracket{k.k2, k.k3}, 1e-12);
  } catch (const BracketError& e) {
    // the equation is negative at k2 and positive at k3 for every n >= 2
    throw std::logic_error(std::string("minimax_c: internal bracketing failure: ") + e.what());
  }
}

}  // namespace detail

/// Restricted minimax coefficient: the root r_n in [k2, k3] for Best, k2 for
/// Worst. Cached per n; concurrent first calls may both compute, which is
/// harmless because the value is deterministic.
inline double minimax_c(int n, Target target) {
  detail::check_n(n, "minimax_c");
  if (target == Target::Worst) return constants(n).k2;
  static std::mutex mutex;
  static std::map<int, double> cache;
  {
    std::lock_guard lock(mutex);
    if (auto it = cache.find(n); it != cache.end()) return it->second;
  }
  const double r = detail::solve_minimax_best(n);
  std::lock_guard lock(mutex);
  cache[n] = r;
  return r;
}

// ---------------------------------------------------------------------------
// Conditional-risk minimizer Psi_mu(w)

struct GapIntegrals {
  double i1;
  double i2;
};

namespace detail {

// Breakpoints for [a, b]: unit steps for 64 units in from each end, widths
// doubling towards the middle. The kernels here put their mass near one
// end, so the ends are resolved finely while long ranges stay cheap.
inline std::vector<double> quadrature_breaks(double a, double b) {
  const double len = b - a;
  std::vector<double> offsets;
  for (double d = 1.0; d <= 64.0 && d < len / 2; d += 1.0) offsets.push_back(d);
  for (double step = 2.0, d = 66.0; d < len / 2; step *= 2.0, d += step) offsets.push_back(d);
  std::vector<double> breaks{a, b};
  for (double d : offsets) {
    breaks.push_back(a + d);
    breaks.push_back(b - d);
  }
  std::sort(breaks.begin(), breaks.end());
  breaks.erase(std::unique(breaks.begin(), breaks.end()), breaks.end());
  return breaks;
}

// Integrates piece by piece; each piece gets its share of `tol` times the
// integrand's sampled magnitude, so the tolerance is relative for large
// integrands.
template <typename F>
double integrate_pieces(F&& f, double a, double b, double tol) {
  const auto breaks = quadrature_breaks(a, b);
  const std::size_t pieces = breaks.size() - 1;
  double scale = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) {
    double peak = 0.0;
    for (int j = 0; j <= 16; ++j) peak = std::max(peak, std::abs(f(breaks[i] + (breaks[i + 1] - breaks[i]) * j / 16.0)));
    scale += peak * (breaks[i + 1] - breaks[i]);
  }
  const double abs_tol = tol * std::max(1.0, scale) / static_cast<double>(pieces);
  double total = 0.0;
  for (std::size_t i = 0; i < pieces; ++i) total += integrate(f, breaks[i], breaks[i + 1], abs_tol);
  return total;
}

// log of e^{2nu} Ḡ_m(u(1+nw)/w)
inline double log_best_kernel(double u, double w, int n, int m) {
  return 2.0 * n * u + log_upper_reg_gamma_int(m, u * (1.0 + n * w) / w);
}

// log of e^{2t} Ḡ_m(a t)
inline double log_worst_kernel(double t, double a, int m) { return 2.0 * t + log_upper_reg_gamma_int(m, a * t); }

inline void check_psi_args(double w, double mu, int n) {
  check_n(n, "psi_mu");
  if (!(w > 0.0)) throw DomainError("psi_mu: w must be > 0");
  if (!(mu >= 0.0)) throw DomainError("psi_mu: mu must be >= 0");
}

}  // namespace detail

/// I1(mu) = ∫_0^{mu/n} u e^{2nu} Ḡ_{2n}(u(1+nw)/w) du and
/// I2(mu) = ∫_0^{mu/n} e^{2nu} Ḡ_{2n+1}(u(1+nw)/w) du, unscaled.
inline GapIntegrals gap_integrals(NormalizedGap mu, double w, int n, double tol = 1e-10) {
  detail::check_psi_args(w, mu, n);
  const double upper = mu / n;
  const double i1 = detail::integrate_pieces(
      [&](double u) { return u * std::exp(detail::log_best_kernel(u, w, n, 2 * n)); }, 0.0, upper, tol);
  const double i2 = detail::integrate_pieces(
      [&](double u) { return std::exp(detail::log_best_kernel(u, w, n, 2 * n + 1)); }, 0.0, upper, tol);
  return {i1, i2};
}

/// k(mu) = (1 + mu - 2n^2 I1) / (1 + n I2). Both integrals are computed
/// with a common factor e^{-L} pulled out so large mu cannot overflow.
inline double k_best(NormalizedGap mu, double w, int n, double tol = 1e-10) {
  detail::check_psi_args(w, mu, n);
  if (mu.value() == 0.0) return 1.0;
  const double upper = mu / n;
  const double log_scale = std::max(0.0, detail::log_best_kernel(upper, w, n, 2 * n + 1));
  const double i1 = detail::integrate_pieces(
      [&](double u) { return u * std::exp(detail::log_best_kernel(u, w, n, 2 * n) - log_scale); }, 0.0, upper, tol);
  const double i2 = detail::integrate_pieces(
      [&](double u) { return std::exp(detail::log_best_kernel(u, w, n, 2 * n + 1) - log_scale); }, 0.0, upper,
      tol);
  const double nd = n;
  const double base = std::exp(-log_scale);
  return (base * (1.0 + mu) - 2.0 * nd * nd * i1) / (base + nd * i2);
}

/// xi(mu) for order m and rate a:
///   (1 + mu[1 + 2∫e^{2t}Ḡ_m(at)] - 2∫t e^{2t}Ḡ_m(at)) / (1 + ∫e^{2t}Ḡ_{m+1}(at)),
/// integrals over [0, mu]. The numerator is evaluated as
/// 1 + mu + 2∫(mu - t) e^{2t} Ḡ_m(at) dt, which is free of cancellation.
inline double xi_worst(NormalizedGap mu, int m, double a, double tol = 1e-10) {
  if (m < 1) throw DomainError("xi_worst: m must be >= 1");
  if (!(a > 0.0)) throw DomainError("xi_worst: a must be > 0");
  if (mu.value() == 0.0) return 1.0;
  const double log_scale = std::max(0.0, detail::log_worst_kernel(mu, a, m + 1));
  const double num = detail::integrate_pieces(
      [&](double t) { return (mu - t) * std::exp(detail::log_worst_kernel(t, a, m) - log_scale); }, 0.0, mu, tol);
  const double den = detail::integrate_pieces(
      [&](double t) { return std::exp(detail::log_worst_kernel(t, a, m + 1) - log_scale); }, 0.0, mu, tol);
  const double base = std::exp(-log_scale);
  return (base * (1.0 + mu) + 2.0 * num) / (base + den);
}

/// Minimizer over Psi of the conditional risk given W = w:
/// ((1+nw)/(4n^2)) k(mu) for Best, ((1+nw)/(4n^2)) xi(mu) with m = 2n and
/// a = (1+nw)/(nw) for Worst.
inline double psi_mu(double w, NormalizedGap mu, int n, Target target) {
  detail::check_psi_args(w, mu, n);
  const double nd = n;
  const double scale = (1.0 + nd * w) / (4.0 * nd * nd);
  if (target == Target::Best) return scale * k_best(mu, w, n);
  return scale * xi_worst(mu, 2 * n, (1.0 + nd * w) / (nd * w));
}

namespace detail {

// Envelopes without the w > 0 precondition; w = 0 arises only from tied data.
inline PsiEnvelopes envelopes_unchecked(double w, int n, Target target) {
  const double nd = n;
  const double band = (1.0 + nd * w) / (4.0 * nd * nd);
  const bool wide = nd * w >= 1.0;
  if (target == Target::Best) {
    return {-w, wide ? UpperBound::finite(band) : UpperBound::unbounded()};
  }
  return {wide ? 0.0 : band, wide ? UpperBound::finite(band) : UpperBound::unbounded()};
}

}  // namespace detail

/// inf / sup over mu of psi_mu(w). For Best the lower value is the bound
/// -w, which the infimum never falls below.
inline PsiEnvelopes psi_envelopes(double w, int n, Target target) {
  detail::check_n(n, "psi_envelopes");
  if (!(w > 0.0)) throw DomainError("psi_envelopes: w must be > 0");
  return detail::envelopes_unchecked(w, n, target);
}

}  // namespace selest
