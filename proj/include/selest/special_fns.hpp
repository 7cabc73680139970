#pragma once

// Numerical kernel: upper regularized incomplete gamma, counter-based random
// streams, adaptive Simpson quadrature and safeguarded bracketed root finding.

#include <algorithm>
#include <array>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace selest {

class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class ConvergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class BracketError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A value known to lie in [0, 1].
class Probability {
 public:
  explicit Probability(double v) : value_(v) {
    if (!(v >= 0.0 && v <= 1.0)) throw DomainError("probability outside [0,1]: " + std::to_string(v));
  }
  [[nodiscard]] double value() const noexcept { return value_; }
  operator double() const noexcept { return value_; }  // NOLINT(google-explicit-constructor)

 private:
  double value_;
};

struct Bracket {
  double lo;
  double hi;
};

namespace detail {

inline bool is_integer(double a) { return a == std::floor(a) && a < 1e9; }

inline double log_factorial(int j) {
  static const auto table = [] {
    std::array<double, 512> t{};
    for (int i = 1; i < 512; ++i) t[i] = t[i - 1] + std::log(static_cast<double>(i));
    return t;
  }();
  return j < 512 ? table[j] : std::lgamma(j + 1.0);
}

// log of sum_{j<m} x^j/j! by log-sum-exp over the terms.
inline double log_partial_exp_sum(int m, double x) {
  if (x == 0.0) return 0.0;
  const double lx = std::log(x);
  // the largest term sits at j = min(m-1, floor(x))
  const int jmax = std::min(m - 1, static_cast<int>(std::min(x, 1e9)));
  const double peak = jmax * lx - log_factorial(jmax);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) acc += std::exp(j * lx - log_factorial(j) - peak);
  return peak + std::log(acc);
}

// Series for the lower regularized gamma P(a,x), valid for x < a+1.
inline double lower_reg_gamma_series(double a, double x) {
  double sum = 1.0 / a;
  double term = sum;
  for (int k = 1; k < 10000; ++k) {
    term *= x / (a + k);
    sum += term;
    if (std::abs(term) < std::abs(sum) * 1e-17) break;
  }
  return sum * std::exp(-x + a * std::log(x) - std::lgamma(a));
}

// Modified Lentz continued fraction for Q(a,x), valid for x >= a+1.
inline double upper_reg_gamma_cf(double a, double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0 - a;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i < 10000; ++i) {
    const double an = -i * (i - a);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < tiny) d = tiny;
    c = b + an / c;
    if (std::abs(c) < tiny) c = tiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < 1e-16) break;
  }
  return std::exp(-x + a * std::log(x) - std::lgamma(a)) * h;
}

}  // namespace detail

/// log of Ḡ_m(x) for integer order m >= 1: -x + log sum_{j<m} x^j/j!.
inline double log_upper_reg_gamma_int(int m, double x) {
  if (m < 1) throw DomainError("log_upper_reg_gamma_int: order must be >= 1");
  if (x < 0.0) throw DomainError("log_upper_reg_gamma_int: x must be >= 0");
  return -x + detail::log_partial_exp_sum(m, x);
}

/// Upper regularized incomplete gamma Ḡ_α(x) = ∫ₓ^∞ e^{-t} t^{α-1}/Γ(α) dt.
/// Integer orders use the finite Poisson sum; other orders fall back to the
/// series / continued-fraction pair.
inline Probability upper_reg_gamma(double alpha, double x) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) throw DomainError("upper_reg_gamma: alpha must be > 0");
  if (!(x >= 0.0)) throw DomainError("upper_reg_gamma: x must be >= 0");
  if (x == 0.0) return Probability(1.0);
  if (std::isinf(x)) return Probability(0.0);
  double q;
  if (detail::is_integer(alpha)) {
    q = std::exp(log_upper_reg_gamma_int(static_cast<int>(alpha), x));
  } else if (x < alpha + 1.0) {
    q = 1.0 - detail::lower_reg_gamma_series(alpha, x);
  } else {
    q = detail::upper_reg_gamma_cf(alpha, x);
  }
  return Probability(std::clamp(q, 0.0, 1.0));
}

// ---------------------------------------------------------------------------
// Random streams

namespace detail {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}
}  // namespace detail

template <typename G>
concept UniformSource = requires(G g) {
  { g.uniform() } -> std::convertible_to<double>;
};

/// Counter-based stream: a 64-bit key plus a draw counter. Substreams are
/// derived by hashing an index into the key, so any (seed, grid, replicate)
/// tuple names a reproducible sequence without shared state.
class RngStream {
 public:
  constexpr explicit RngStream(std::uint64_t key) noexcept : key_(detail::mix64(key + detail::kGolden)) {}

  [[nodiscard]] constexpr RngStream substream(std::uint64_t index) const noexcept {
    RngStream s(0);
    s.key_ = detail::mix64(key_ ^ detail::mix64(index * detail::kGolden + 0x632BE59BD9B4E019ULL));
    return s;
  }

  constexpr std::uint64_t next_u64() noexcept { return detail::mix64(key_ + (++counter_) * detail::kGolden); }

  /// Uniform on the open interval (0,1), 53-bit resolution.
  constexpr double uniform() noexcept {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  [[nodiscard]] constexpr std::uint64_t key() const noexcept { return key_; }
  [[nodiscard]] constexpr std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

inline double exponential_from_uniform(double u, double location, double scale) {
  return location - scale * std::log(u);
}

/// Exp(location, scale) by inverse transform: location + scale * (-ln U).
template <UniformSource G>
double sample_exponential(G& stream, double location, double scale) {
  if (!(scale > 0.0)) throw DomainError("sample_exponential: scale must be > 0");
  return exponential_from_uniform(stream.uniform(), location, scale);
}

/// Gamma(shape, scale) for integer shape as a sum of `shape` unit exponentials.
template <UniformSource G>
double sample_gamma_int(G& stream, int shape, double scale) {
  if (shape < 1) throw DomainError("sample_gamma_int: shape must be >= 1");
  if (!(scale > 0.0)) throw DomainError("sample_gamma_int: scale must be > 0");
  double acc = 0.0;
  for (int i = 0; i < shape; ++i) acc -= std::log(stream.uniform());
  return scale * acc;
}

// ---------------------------------------------------------------------------
// Quadrature

struct IntegrateOptions {
  double tol = 1e-10;
  int max_depth = 60;
};

namespace detail {

template <typename F>
double simpson_rec(F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                   int depth, bool& failed) {
  const double m = 0.5 * (a + b);
  const double lm = 0.5 * (a + m);
  const double rm = 0.5 * (m + b);
  const double flm = f(lm);
  const double frm = f(rm);
  const double h = (b - a) / 12.0;
  const double left = h * (fa + 4.0 * flm + fm);
  const double right = h * (fm + 4.0 * frm + fb);
  const double both = left + right;
  const double diff = both - whole;
  const double roundoff = 512.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
  if (std::abs(diff) <= 15.0 * tol || std::abs(diff) <= roundoff) return both + diff / 15.0;
  if (depth <= 0 || m <= a || b <= m) {
    failed = true;
    return both + diff / 15.0;
  }
  return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, failed) +
         simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, failed);
}

}  // namespace detail

/// Adaptive Simpson on [a,b] to absolute tolerance `tol`. Throws
/// ConvergenceError when some subinterval exhausts the depth budget.
template <typename F>
double integrate(F&& f, double a, double b, IntegrateOptions opts = {}) {
  if (!(a <= b)) throw DomainError("integrate: require a <= b");
  if (!(opts.tol > 0.0)) throw DomainError("integrate: tol must be > 0");
  if (a == b) return 0.0;
  auto& fn = f;
  const double fa = fn(a);
  const double fb = fn(b);
  const double m = 0.5 * (a + b);
  const double fm = fn(m);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  bool failed = false;
  const double result = detail::simpson_rec(fn, a, b, fa, fm, fb, whole, opts.tol, opts.max_depth, failed);
  if (failed || !std::isfinite(result)) {
    throw ConvergenceError("integrate: no convergence on [" + std::to_string(a) + ", " + std::to_string(b) +
                           "] within " + std::to_string(opts.max_depth) + " subdivision levels");
  }
  return result;
}

template <typename F>
double integrate(F&& f, double a, double b, double tol) {
  return integrate(std::forward<F>(f), a, b, IntegrateOptions{tol, 60});
}

// ---------------------------------------------------------------------------
// Root finding

/// Bisection with safeguarded secant steps. A secant step is only accepted
/// when it lands strictly inside the bracket and the previous step shrank the
/// bracket by at least half; otherwise the midpoint is used. Terminates when
/// the bracket is no wider than `tol`, returning the bracket end with the
/// smaller residual.
template <typename F>
double find_root(F&& f, Bracket bracket, double tol = 1e-12, int max_iter = 400) {
  double lo = bracket.lo;
  double hi = bracket.hi;
  if (!(lo < hi)) throw BracketError("find_root: bracket requires lo < hi");
  double flo = f(lo);
  double fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if (std::signbit(flo) == std::signbit(fhi)) {
    throw BracketError("find_root: f(lo) and f(hi) have the same sign");
  }
  bool allow_secant = true;
  for (int it = 0; it < max_iter; ++it) {
    const double width = hi - lo;
    if (width <= tol) break;
    double x = 0.5 * (lo + hi);
    if (allow_secant) {
      const double s = hi - fhi * (hi - lo) / (fhi - flo);
      if (s > lo && s < hi) x = s;
    }
    const double fx = f(x);
    if (fx == 0.0) return x;
    if (std::signbit(fx) == std::signbit(flo)) {
      lo = x;
      flo = fx;
    } else {
      hi = x;
      fhi = fx;
    }
    allow_secant = (hi - lo) <= 0.5 * width;
  }
  if (hi - lo > tol) throw ConvergenceError("find_root: bracket did not shrink below tolerance");
  return std::abs(flo) <= std::abs(fhi) ? lo : hi;
}

}  // namespace selest
