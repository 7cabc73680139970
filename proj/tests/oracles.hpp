#pragma once

// Independent reference computations for the tests. Nothing here calls the
// closed forms under test; they are built from the sampling model directly.

#include <cmath>
#include <functional>

#include <algorithm>

namespace oracle {

// Composite Simpson with a fixed panel count; smooth integrands only.
template <typename F>
double simpson(F&& f, double a, double b, int panels = 600) {
  if (b <= a) return 0.0;
  const double h = (b - a) / (2 * panels);
  double acc = f(a) + f(b);
  for (int i = 1; i < 2 * panels; ++i) acc += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return acc * h / 3.0;
}

// E[(Z - T)^k], k = 1, 2, by a double integral over the two unit-scale
// exponential minima. Z is the larger (best) or smaller (worst) minimum and
// T the location of the population it comes from. sigma = 1, theta1 = 0,
// theta2 = mu/n.
inline double selection_moment(double mu, int n, bool best, int k) {
  const double t1 = 0.0;
  const double t2 = mu / n;
  const double len = 45.0 / n;
  auto dens = [n](double x, double t) { return x < t ? 0.0 : n * std::exp(-n * (x - t)); };
  // on each side of x2 = x1 the selected population is fixed; the pieces are
  // integrated separately so endpoint values come from the right side
  auto err = [&](double x1, double x2, bool pick1) {
    return pick1 ? std::pow(x1 - t1, k) : std::pow(x2 - t2, k);
  };
  auto inner = [&](double x1) {
    // x2 below x1: best picks 1, worst picks 2
    auto below = [&](double x2) { return dens(x2, t2) * err(x1, x2, best); };
    auto above = [&](double x2) { return dens(x2, t2) * err(x1, x2, !best); };
    const double lo = t2;
    const double hi = t2 + len;
    if (x1 <= lo) return simpson(above, lo, hi);
    if (x1 >= hi) return simpson(below, lo, hi);
    return simpson(below, lo, x1) + simpson(above, x1, hi);
  };
  auto outer = [&](double x1) { return dens(x1, t1) * inner(x1); };
  if (t2 > t1 && t2 < t1 + len) {
    return simpson(outer, t1, t2) + simpson(outer, t2, t1 + len);
  }
  return simpson(outer, t1, t1 + len);
}

// Scaled risk of Z - cS from the moments above and E S = 2(n-1),
// E S^2 = 2(n-1)(2n-1) for S ~ Gamma(2(n-1)), independent of the minima.
inline double linear_risk(double c, double mu, int n, bool best) {
  const double e1 = selection_moment(mu, n, best, 1);
  const double e2 = selection_moment(mu, n, best, 2);
  const double es = 2.0 * (n - 1);
  const double es2 = 2.0 * (n - 1) * (2.0 * n - 1);
  return e2 - 2.0 * c * es * e1 + c * c * es2;
}

// P(the selected population is population 2) as a double integral of the
// indicator against the joint density.
inline double prob_select_second(double mu, int n, bool best) {
  const double t2 = mu / n;
  const double len = 45.0 / n;
  auto inner = [&](double x1) {
    // P(X2 > x1) for best, P(X2 < x1) for worst, by integrating the density
    auto g = [&](double x2) { return n * std::exp(-n * (x2 - t2)); };
    const double lo = std::max(x1, t2);
    const double above = lo >= t2 + len ? 0.0 : simpson(g, lo, t2 + len);
    return best ? above : 1.0 - above - std::exp(-n * len);
  };
  auto outer = [&](double x1) { return n * std::exp(-n * x1) * inner(x1); };
  return simpson(outer, 0.0, std::min(t2, len)) + simpson(outer, std::min(t2, len), len);
}

// Plain bisection on [lo, hi].
inline double bisect(const std::function<double(double)>& f, double lo, double hi) {
  double flo = f(lo);
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if ((fm < 0) == (flo < 0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace oracle
