#pragma once

// Affine and permutation equivariant estimators of the selected location,
// all of the form Z1 - S Psi(W), W = (Z2 - Z1)/S.

#include <charconv>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <variant>

#include "selest/analytic_risk.hpp"
#include "selest/constants.hpp"
#include "selest/model.hpp"

namespace selest {

/// Z2 - cS (best) or Z1 - cS (worst). When `named` is 0..3 the coefficient is
/// the constant k0..k3 at the sample size in use, otherwise `c`.
struct Linear {
  double c = 0.0;
  int named = -1;

  static Linear constant(int which) { return Linear{0.0, which}; }
};

struct Umvue {};
struct GeneralizedBayes {};
struct MinimaxLinear {};

using BaseFamily = std::variant<Linear, Umvue, GeneralizedBayes, MinimaxLinear>;

/// Truncation of a base estimator's Psi(W) onto the band where the
/// conditional risk cannot be lowered further. The base cannot itself be
/// Improved.
struct Improved {
  BaseFamily base;
};

using Family = std::variant<Linear, Umvue, GeneralizedBayes, MinimaxLinear, Improved>;

struct EstimatorSpec {
  Target target = Target::Best;
  Family family = Linear{};
};

class SpecParseError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline constexpr std::string_view kSpecGrammar =
    "estimator spec grammar:\n"
    "  spec    := [target ':'] family\n"
    "  target  := 'best' | 'worst'\n"
    "  family  := base | 'improved(' base ')'\n"
    "  base    := 'linear:c=' (number | 'k0' | 'k1' | 'k2' | 'k3') | 'umvue' | 'gb' | 'minimax'\n"
    "examples: best:linear:c=0.0667  best:umvue  worst:improved(linear:c=0)  best:minimax";

// ---------------------------------------------------------------------------
// Canonical strings

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::string base_to_string(const BaseFamily& f) {
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Linear>) {
          if (b.named >= 0) return "linear:c=k" + std::to_string(b.named);
          return "linear:c=" + format_double(b.c);
        } else if constexpr (std::is_same_v<T, Umvue>) {
          return "umvue";
        } else if constexpr (std::is_same_v<T, GeneralizedBayes>) {
          return "gb";
        } else {
          return "minimax";
        }
      },
      f);
}

[[noreturn]] inline void parse_fail(std::string_view text, std::string_view why) {
  throw SpecParseError("cannot parse estimator '" + std::string(text) + "': " + std::string(why) + "\n" +
                       std::string(kSpecGrammar));
}

inline BaseFamily parse_base(std::string_view text, std::string_view whole) {
  if (text == "umvue") return Umvue{};
  if (text == "gb" || text == "generalized_bayes") return GeneralizedBayes{};
  if (text == "minimax") return MinimaxLinear{};
  constexpr std::string_view lin = "linear:c=";
  if (text.substr(0, lin.size()) == lin) {
    const std::string_view num = text.substr(lin.size());
    if (num.size() == 2 && num[0] == 'k' && num[1] >= '0' && num[1] <= '3') return Linear::constant(num[1] - '0');
    double c = 0.0;
    const auto* first = num.data();
    const auto* last = num.data() + num.size();
    if (!num.empty() && *first == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, last, c);
    if (ec != std::errc() || ptr != last || !std::isfinite(c)) parse_fail(whole, "bad coefficient '" + std::string(num) + "'");
    return Linear{c, -1};
  }
  if (text.substr(0, 9) == "improved(") parse_fail(whole, "improved() cannot wrap another improved estimator");
  parse_fail(whole, "unknown estimator family '" + std::string(text) + "'");
}

}  // namespace detail

inline std::string family_to_string(const Family& f) {
  if (const auto* imp = std::get_if<Improved>(&f)) return "improved(" + detail::base_to_string(imp->base) + ")";
  return std::visit(
      [](const auto& b) -> std::string {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Improved>) {
          return {};
        } else {
          return detail::base_to_string(BaseFamily{b});
        }
      },
      f);
}

inline std::string to_string(const EstimatorSpec& spec) {
  return std::string(to_string(spec.target)) + ":" + family_to_string(spec.family);
}

inline Family parse_family(std::string_view text) {
  constexpr std::string_view imp = "improved(";
  if (text.substr(0, imp.size()) == imp) {
    if (text.empty() || text.back() != ')') detail::parse_fail(text, "missing ')'");
    const std::string_view inner = text.substr(imp.size(), text.size() - imp.size() - 1);
    return Improved{detail::parse_base(inner, text)};
  }
  return std::visit([](const auto& b) -> Family { return b; }, detail::parse_base(text, text));
}

/// Parses "[best|worst:]family". Without a target prefix, `default_target`
/// is used; when both are present they must agree.
inline EstimatorSpec parse_spec(std::string_view text, std::optional<Target> default_target = std::nullopt) {
  std::optional<Target> target;
  std::string_view rest = text;
  if (rest.substr(0, 5) == "best:") {
    target = Target::Best;
    rest.remove_prefix(5);
  } else if (rest.substr(0, 6) == "worst:") {
    target = Target::Worst;
    rest.remove_prefix(6);
  }
  if (target && default_target && *target != *default_target) {
    detail::parse_fail(text, "target prefix conflicts with requested target '" +
                                 std::string(to_string(*default_target)) + "'");
  }
  if (!target) target = default_target;
  if (!target) detail::parse_fail(text, "missing target prefix 'best:' or 'worst:'");
  return {*target, parse_family(rest)};
}

/// Every family here has the form Z1 - S Psi(W).
inline bool is_affine_permutation_equivariant(const EstimatorSpec&) { return true; }

/// True for the families with a closed-form risk (Z - cS for fixed c).
inline bool is_linear(const EstimatorSpec& spec) {
  return !std::holds_alternative<Umvue>(spec.family) && !std::holds_alternative<Improved>(spec.family);
}

// ---------------------------------------------------------------------------
// Resolution and evaluation

/// An estimator bound to a sample size: aliases expanded to their linear
/// coefficient and r_n looked up once.
struct ResolvedEstimator {
  enum class Kind { Linear, Umvue };
  Target target = Target::Best;
  int n = 2;
  Kind kind = Kind::Linear;
  double c = 0.0;
  bool improved = false;
};

namespace detail {

inline double resolve_linear(const Linear& l, int n) {
  if (l.named < 0) return l.c;
  const auto k = constants(n);
  switch (l.named) {
    case 0: return k.k0;
    case 1: return k.k1;
    case 2: return k.k2;
    case 3: return k.k3;
    default: throw DomainError("Linear: named constant must be k0..k3");
  }
}

inline ResolvedEstimator resolve_base(const BaseFamily& f, Target target, int n) {
  ResolvedEstimator r{target, n, ResolvedEstimator::Kind::Linear, 0.0, false};
  std::visit(
      [&](const auto& b) {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Linear>) {
          r.c = resolve_linear(b, n);
        } else if constexpr (std::is_same_v<T, Umvue>) {
          r.kind = ResolvedEstimator::Kind::Umvue;
        } else if constexpr (std::is_same_v<T, GeneralizedBayes>) {
          r.c = constants(n).k2;
        } else {
          r.c = minimax_c(n, target);
        }
      },
      f);
  return r;
}

// (1 - ratio)^{2(n-1)} I(ratio <= 1), exactly 0 at ratio = 1.
inline double umvue_tail(double ratio, int n) {
  if (ratio >= 1.0) return 0.0;
  return std::exp((2.0 * n - 2.0) * std::log1p(-ratio));
}

inline void require_positive_s(const SufficientStatistic& stat, const char* what) {
  if (!(stat.s > 0.0)) throw DomainError(std::string(what) + ": requires s > 0 (W undefined)");
}

inline double base_value(const ResolvedEstimator& r, const SufficientStatistic& stat) {
  const double z1 = stat.z1();
  const double z2 = stat.z2();
  if (r.kind == ResolvedEstimator::Kind::Linear) {
    return r.target == Target::Best ? z2 - r.c * stat.s : z1 - r.c * stat.s;
  }
  require_positive_s(stat, "umvue");
  const double a = stat.s / (2.0 * r.n * (r.n - 1.0));
  const double p = umvue_tail(stat.delta() / stat.s, r.n);
  return r.target == Target::Best ? z2 - a - a * p : z1 - a + a * p;
}

// Psi(w) of the base read off from delta = z1 - s Psi(w).
inline double base_psi(const ResolvedEstimator& r, double w) {
  if (r.kind == ResolvedEstimator::Kind::Linear) return r.target == Target::Best ? r.c - w : r.c;
  const double k1 = 1.0 / (2.0 * r.n * (r.n - 1.0));
  const double p = umvue_tail(r.n * w, r.n);
  return r.target == Target::Best ? -w + k1 * (1.0 + p) : k1 * (1.0 - p);
}

}  // namespace detail

inline ResolvedEstimator resolve(const EstimatorSpec& spec, int n) {
  if (n < 2) throw DomainError("resolve: n must be >= 2");
  if (const auto* imp = std::get_if<Improved>(&spec.family)) {
    auto r = detail::resolve_base(imp->base, spec.target, n);
    r.improved = true;
    return r;
  }
  auto base = std::visit(
      [](const auto& b) -> BaseFamily {
        using T = std::decay_t<decltype(b)>;
        if constexpr (std::is_same_v<T, Improved>) {
          return Linear{};  // unreachable
        } else {
          return b;
        }
      },
      spec.family);
  return detail::resolve_base(base, spec.target, n);
}

inline double evaluate(const ResolvedEstimator& r, const SufficientStatistic& stat) {
  if (stat.n != r.n) throw DomainError("evaluate: estimator resolved for a different n");
  if (!r.improved) return detail::base_value(r, stat);

  detail::require_positive_s(stat, "improved");
  const double w = stat.w();
  const double z1 = stat.z1();
  const double psi = detail::base_psi(r, w);
  const double nd = r.n;
  if (r.target == Target::Best) {
    if (psi < -w) return z1 + w * stat.s;
    const double band = (1.0 + nd * w) / (4.0 * nd * nd);
    if (nd * w >= 1.0 && psi > band) return z1 - band * stat.s;
    return detail::base_value(r, stat);
  }
  const auto env = detail::envelopes_unchecked(w, r.n, Target::Worst);
  if (psi < env.lower) return z1 - stat.s * env.lower;
  if (env.upper.exceeded_by(psi)) return z1 - stat.s * env.upper.value();
  return detail::base_value(r, stat);
}

inline double evaluate(const EstimatorSpec& spec, const SufficientStatistic& stat) {
  return evaluate(resolve(spec, stat.n), stat);
}

}  // namespace selest
