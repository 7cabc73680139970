#pragma once

// Two exponential populations with unknown guarantee times and a common
// scale: sufficient-statistic reduction, the natural selection rule and the
// random target parameter it induces.

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <string_view>

#include "selest/special_fns.hpp"

namespace selest {

enum class Target { Best, Worst };

inline std::string_view to_string(Target t) { return t == Target::Best ? "best" : "worst"; }

struct PopulationParams {
  double mu1 = 0.0;
  double mu2 = 0.0;
  double sigma = 1.0;

  PopulationParams() = default;
  PopulationParams(double m1, double m2, double s) : mu1(m1), mu2(m2), sigma(s) {
    if (!(s > 0.0)) throw DomainError("PopulationParams: sigma must be > 0");
  }

  [[nodiscard]] double theta1() const noexcept { return std::min(mu1, mu2); }
  [[nodiscard]] double theta2() const noexcept { return std::max(mu1, mu2); }
};

/// (x1, x2, s) with per-population sample size n.
struct SufficientStatistic {
  double x1 = 0.0;
  double x2 = 0.0;
  double s = 0.0;
  int n = 2;

  SufficientStatistic() = default;
  SufficientStatistic(double a, double b, double pooled, int size) : x1(a), x2(b), s(pooled), n(size) {
    if (!(pooled >= 0.0)) throw DomainError("SufficientStatistic: s must be >= 0");
    if (size < 2) throw DomainError("SufficientStatistic: n must be >= 2");
  }

  [[nodiscard]] double z1() const noexcept { return std::min(x1, x2); }
  [[nodiscard]] double z2() const noexcept { return std::max(x1, x2); }
  /// n (z2 - z1)
  [[nodiscard]] double delta() const noexcept { return n * (z2() - z1()); }
  /// (z2 - z1) / s; undefined for s = 0.
  [[nodiscard]] double w() const {
    if (!(s > 0.0)) throw DomainError("SufficientStatistic: W = (z2 - z1)/s is undefined for s = 0");
    return (z2() - z1()) / s;
  }
};

/// n (θ₂ − θ₁) / σ
class NormalizedGap {
 public:
  explicit NormalizedGap(double mu) : mu_(mu) {
    if (!(mu >= 0.0)) throw DomainError("NormalizedGap: mu must be >= 0");
  }
  [[nodiscard]] double value() const noexcept { return mu_; }
  operator double() const noexcept { return mu_; }  // NOLINT(google-explicit-constructor)

 private:
  double mu_;
};

struct SelectionOutcome {
  int selected = 1;
  Target target = Target::Best;
};

inline SufficientStatistic reduce(std::span<const double> pop1, std::span<const double> pop2) {
  if (pop1.size() != pop2.size()) throw DomainError("reduce: populations must have equal sample sizes");
  if (pop1.size() < 2) throw DomainError("reduce: need at least 2 observations per population");
  const double x1 = *std::min_element(pop1.begin(), pop1.end());
  const double x2 = *std::min_element(pop2.begin(), pop2.end());
  double s = 0.0;
  for (double v : pop1) s += v - x1;
  for (double v : pop2) s += v - x2;
  return {x1, x2, s, static_cast<int>(pop1.size())};
}

/// Natural rule: larger minimum for Best, smaller for Worst; ties go to
/// population 1.
inline SelectionOutcome select(const SufficientStatistic& stat, Target target) {
  int idx;
  if (target == Target::Best) {
    idx = stat.x1 >= stat.x2 ? 1 : 2;
  } else {
    idx = stat.x1 <= stat.x2 ? 1 : 2;
  }
  return {idx, target};
}

inline double realized_target(const PopulationParams& params, const SelectionOutcome& outcome) {
  return outcome.selected == 1 ? params.mu1 : params.mu2;
}

inline NormalizedGap normalized_gap(const PopulationParams& params, int n) {
  if (n < 2) throw DomainError("normalized_gap: n must be >= 2");
  return NormalizedGap(n * (params.theta2() - params.theta1()) / params.sigma);
}

/// Draws the sufficient statistic directly: X_i ~ Exp(mu_i, sigma/n) and
/// S ~ sigma * Gamma(2(n-1), 1). Consumes exactly 2 + 2(n-1) uniforms.
template <UniformSource G>
SufficientStatistic sample_statistic(G& stream, const PopulationParams& params, int n) {
  if (n < 2) throw DomainError("sample_statistic: n must be >= 2");
  const double x1 = sample_exponential(stream, params.mu1, params.sigma / n);
  const double x2 = sample_exponential(stream, params.mu2, params.sigma / n);
  const double s = sample_gamma_int(stream, 2 * (n - 1), params.sigma);
  return {x1, x2, s, n};
}

}  // namespace selest
