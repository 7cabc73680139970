#pragma once

// Deterministic Monte Carlo for scaled risk, bias and paired (common random
// number) domination comparisons, plus a conditional-MC check of Psi_mu(w).
//
// Replicate r of grid point g draws from RngStream(seed).substream(g)
// .substream(r), so every estimator evaluated under the same config sees the
// same samples, and results do not depend on how work is split. Replicates
// are summarized in fixed-size blocks that are merged in block order, which
// makes the floating-point reduction independent of the worker count.

#include <algorithm>
#include <array>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "selest/analytic_risk.hpp"
#include "selest/estimators.hpp"
#include "selest/model.hpp"
#include "selest/special_fns.hpp"

namespace selest {

struct McConfig {
  int replicates = 20000;
  std::uint64_t seed = 20240601;
  int n = 3;
  std::vector<double> mu_grid{0.0};
  double sigma = 1.0;
  double theta1 = 0.0;

  void validate() const {
    if (replicates < 1) throw DomainError("McConfig: replicates must be >= 1");
    if (n < 2) throw DomainError("McConfig: n must be >= 2");
    if (!(sigma > 0.0)) throw DomainError("McConfig: sigma must be > 0");
    if (mu_grid.empty()) throw DomainError("McConfig: mu_grid is empty");
    for (double mu : mu_grid) {
      if (!(mu >= 0.0)) throw DomainError("McConfig: mu_grid values must be >= 0");
    }
  }

  /// Population 1 holds theta1, population 2 sits mu*sigma/n above it.
  [[nodiscard]] PopulationParams params_at(double mu) const {
    return PopulationParams(theta1, theta1 + mu * sigma / n, sigma);
  }
};

struct McRiskResult {
  std::vector<RiskPoint> points;
  EstimatorSpec estimator;
  McConfig config;
};

struct BiasPoint {
  double mu;
  double bias;
  double se;
};

struct MeanPoint {
  double mu;
  double mean;
  double se;
  double expected_target;
};

enum class Verdict { ChallengerBetter, BaseBetter, Inconclusive };
enum class Overall { Dominates, Inconclusive, BaseWins };

inline std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::ChallengerBetter: return "challenger_better";
    case Verdict::BaseBetter: return "base_better";
    default: return "inconclusive";
  }
}

inline std::string_view to_string(Overall v) {
  switch (v) {
    case Overall::Dominates: return "dominates";
    case Overall::BaseWins: return "base_wins";
    default: return "inconclusive";
  }
}

struct DominationPoint {
  double mu;
  double base_risk;
  double challenger_risk;
  double mean_diff;  // challenger minus base
  double se;         // paired
  double unpaired_se;
  Verdict verdict;
};

struct DominationReport {
  EstimatorSpec base;
  EstimatorSpec challenger;
  std::vector<DominationPoint> points;
  Overall overall;
};

/// SELEST_WORKERS when set to a positive integer, else the hardware
/// concurrency.
inline int default_workers() {
  if (const char* env = std::getenv("SELEST_WORKERS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(v);
  }
  const unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

namespace detail {

inline constexpr int kBlock = 500;

struct Moments {
  double count = 0.0;
  double mean = 0.0;
  double m2 = 0.0;

  void add(double x) {
    count += 1.0;
    const double d = x - mean;
    mean += d / count;
    m2 += d * (x - mean);
  }
  void merge(const Moments& o) {
    if (o.count == 0.0) return;
    const double total = count + o.count;
    const double d = o.mean - mean;
    mean += d * o.count / total;
    m2 += o.m2 + d * d * count * o.count / total;
    count = total;
  }
  [[nodiscard]] double variance() const { return count > 1.0 ? m2 / (count - 1.0) : 0.0; }
  [[nodiscard]] double se() const { return count > 0.0 ? std::sqrt(variance() / count) : 0.0; }
};

/// Runs `kernel(stream, params, stat)` for every replicate of every grid
/// point and returns per-grid-point moments of each of its K outputs.
template <std::size_t K, typename Kernel>
std::vector<std::array<Moments, K>> run_grid(const McConfig& cfg, Kernel&& kernel, int workers) {
  cfg.validate();
  if (workers <= 0) workers = default_workers();
  const std::size_t grid = cfg.mu_grid.size();
  const int blocks_per_point = (cfg.replicates + kBlock - 1) / kBlock;
  const std::size_t tasks = grid * static_cast<std::size_t>(blocks_per_point);
  std::vector<std::array<Moments, K>> partial(tasks);
  const RngStream root(cfg.seed);

  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    for (;;) {
      const std::size_t task = next.fetch_add(1);
      if (task >= tasks || abort.load()) return;
      const std::size_t g = task / blocks_per_point;
      const int block = static_cast<int>(task % blocks_per_point);
      const PopulationParams params = cfg.params_at(cfg.mu_grid[g]);
      const RngStream point_stream = root.substream(g);
      const int first = block * kBlock;
      const int last = std::min(cfg.replicates, first + kBlock);
      try {
        auto& acc = partial[task];
        for (int r = first; r < last; ++r) {
          RngStream stream = point_stream.substream(static_cast<std::uint64_t>(r));
          const SufficientStatistic stat = sample_statistic(stream, params, cfg.n);
          const std::array<double, K> values = kernel(params, stat);
          for (std::size_t k = 0; k < K; ++k) acc[k].add(values[k]);
        }
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        abort.store(true);
        return;
      }
    }
  };

  const int nthreads = static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(workers), tasks));
  if (nthreads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(nthreads);
    for (int t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  std::vector<std::array<Moments, K>> out(grid);
  for (std::size_t g = 0; g < grid; ++g) {
    for (int b = 0; b < blocks_per_point; ++b) {
      const auto& part = partial[g * blocks_per_point + b];
      for (std::size_t k = 0; k < K; ++k) out[g][k].merge(part[k]);
    }
  }
  return out;
}

inline double realized(const PopulationParams& params, const SufficientStatistic& stat, Target target) {
  return realized_target(params, select(stat, target));
}

}  // namespace detail

/// Mean and standard error of ((delta(T) - selected location)/sigma)^2 at
/// every grid point.
inline McRiskResult estimate_risk(const EstimatorSpec& spec, const McConfig& cfg, int workers = 0) {
  const ResolvedEstimator est = resolve(spec, cfg.n);
  auto moments = detail::run_grid<1>(
      cfg,
      [&](const PopulationParams& p, const SufficientStatistic& stat) {
        const double e = (evaluate(est, stat) - detail::realized(p, stat, spec.target)) / p.sigma;
        return std::array<double, 1>{e * e};
      },
      workers);
  McRiskResult result{{}, spec, cfg};
  for (std::size_t g = 0; g < moments.size(); ++g) {
    result.points.push_back({cfg.mu_grid[g], cfg.n, moments[g][0].mean, moments[g][0].se()});
  }
  return result;
}

/// Scaled bias (delta(T) - selected location)/sigma.
inline std::vector<BiasPoint> estimate_bias(const EstimatorSpec& spec, const McConfig& cfg, int workers = 0) {
  const ResolvedEstimator est = resolve(spec, cfg.n);
  auto moments = detail::run_grid<1>(
      cfg,
      [&](const PopulationParams& p, const SufficientStatistic& stat) {
        return std::array<double, 1>{(evaluate(est, stat) - detail::realized(p, stat, spec.target)) / p.sigma};
      },
      workers);
  std::vector<BiasPoint> out;
  for (std::size_t g = 0; g < moments.size(); ++g) {
    out.push_back({cfg.mu_grid[g], moments[g][0].mean, moments[g][0].se()});
  }
  return out;
}

/// P(the selected population is the one located at theta2).
inline double selection_weight(NormalizedGap mu, Target target) {
  const double tail = 0.5 * std::exp(-mu.value());
  return target == Target::Best ? 1.0 - tail : tail;
}

/// E(selected location) = theta1 + (theta2 - theta1) * selection_weight.
inline double expected_target(const PopulationParams& params, int n, Target target) {
  const double gap = params.theta2() - params.theta1();
  return params.theta1() + gap * selection_weight(normalized_gap(params, n), target);
}

/// Raw mean of the estimator with its SE and the expected selected location.
inline std::vector<MeanPoint> estimate_mean(const EstimatorSpec& spec, const McConfig& cfg, int workers = 0) {
  const ResolvedEstimator est = resolve(spec, cfg.n);
  auto moments = detail::run_grid<1>(
      cfg,
      [&](const PopulationParams&, const SufficientStatistic& stat) {
        return std::array<double, 1>{evaluate(est, stat)};
      },
      workers);
  std::vector<MeanPoint> out;
  for (std::size_t g = 0; g < moments.size(); ++g) {
    const double mu = cfg.mu_grid[g];
    out.push_back({mu, moments[g][0].mean, moments[g][0].se(), expected_target(cfg.params_at(mu), cfg.n, spec.target)});
  }
  return out;
}

/// Paired comparison on identical samples. A point counts for one side when
/// the mean loss difference is more than 3 paired SEs away from zero.
inline DominationReport compare_domination(const EstimatorSpec& base, const EstimatorSpec& challenger,
                                           const McConfig& cfg, int workers = 0) {
  if (base.target != challenger.target) {
    throw DomainError("compare_domination: base and challenger must share a target");
  }
  const ResolvedEstimator b = resolve(base, cfg.n);
  const ResolvedEstimator c = resolve(challenger, cfg.n);
  const Target target = base.target;
  auto moments = detail::run_grid<3>(
      cfg,
      [&](const PopulationParams& p, const SufficientStatistic& stat) {
        const double truth = detail::realized(p, stat, target);
        const double eb = (evaluate(b, stat) - truth) / p.sigma;
        const double ec = (evaluate(c, stat) - truth) / p.sigma;
        return std::array<double, 3>{ec * ec - eb * eb, eb * eb, ec * ec};
      },
      workers);

  DominationReport report{base, challenger, {}, Overall::Inconclusive};
  bool any_base = false;
  bool any_challenger = false;
  for (std::size_t g = 0; g < moments.size(); ++g) {
    const auto& m = moments[g];
    const double diff = m[0].mean;
    const double se = m[0].se();
    const double unpaired = std::sqrt(m[1].se() * m[1].se() + m[2].se() * m[2].se());
    Verdict v = Verdict::Inconclusive;
    if (diff < -3.0 * se) v = Verdict::ChallengerBetter;
    if (diff > 3.0 * se) v = Verdict::BaseBetter;
    any_base |= v == Verdict::BaseBetter;
    any_challenger |= v == Verdict::ChallengerBetter;
    report.points.push_back({cfg.mu_grid[g], m[1].mean, m[2].mean, diff, se, unpaired, v});
  }
  if (any_base) {
    report.overall = Overall::BaseWins;
  } else if (any_challenger) {
    report.overall = Overall::Dominates;
  }
  return report;
}

// ---------------------------------------------------------------------------
// Conditional Monte Carlo for Psi_mu(w)

struct PsiValidationOptions {
  std::uint64_t seed = 20240601;
  int min_hits = 2000;
  int batch = 100000;
  long long budget = 20'000'000;
  double initial_half_width = 0.02;
  int max_doublings = 6;
};

struct PsiValidation {
  double analytic;
  double empirical;
  double se;
  long long hits;
  double half_width;
  long long replicates;
};

/// Simulates (U', V, W) with U' the scaled error of Z1 about the selected
/// location and V = S/sigma, keeps draws with |W - w| <= h and forms
/// mean(U'V)/mean(V^2). h starts at 0.02; it is doubled only once the
/// replicate budget is spent without reaching `min_hits`. A diagnostic, not a
/// proof.
inline PsiValidation validate_psi(double w, NormalizedGap mu, int n, Target target, PsiValidationOptions opts = {}) {
  if (!(w > 0.0)) throw DomainError("validate_psi: w must be > 0");
  if (n < 2) throw DomainError("validate_psi: n must be >= 2");
  const double analytic = psi_mu(w, mu, n, target);

  const double h_max = opts.initial_half_width * std::ldexp(1.0, opts.max_doublings);
  const PopulationParams params(0.0, mu / n, 1.0);
  const RngStream root(opts.seed);
  struct Draw {
    double dist;
    double uv;
    double vv;
  };
  std::vector<Draw> kept;
  long long drawn = 0;
  auto hits_within = [&](double h) {
    long long c = 0;
    for (const auto& d : kept) c += d.dist <= h;
    return c;
  };
  while (drawn < opts.budget) {
    for (int i = 0; i < opts.batch && drawn < opts.budget; ++i, ++drawn) {
      RngStream stream = root.substream(static_cast<std::uint64_t>(drawn));
      const SufficientStatistic stat = sample_statistic(stream, params, n);
      const double dist = std::abs(stat.w() - w);
      if (dist > h_max) continue;
      const double u = stat.z1() - detail::realized(params, stat, target);
      kept.push_back({dist, u * stat.s, stat.s * stat.s});
    }
    if (hits_within(opts.initial_half_width) >= opts.min_hits) break;
  }
  double h = opts.initial_half_width;
  for (int d = 0; d < opts.max_doublings && hits_within(h) < opts.min_hits; ++d) h *= 2.0;
  const long long hits = hits_within(h);
  if (hits < opts.min_hits) {
    throw ConvergenceError("validate_psi: only " + std::to_string(hits) + " draws with |W - w| <= " +
                           std::to_string(h) + " after " + std::to_string(drawn) +
                           " replicates; increase the replicate budget");
  }
  double suv = 0.0;
  double svv = 0.0;
  for (const auto& d : kept) {
    if (d.dist <= h) {
      suv += d.uv;
      svv += d.vv;
    }
  }
  const double ratio = suv / svv;
  double sres = 0.0;
  for (const auto& d : kept) {
    if (d.dist <= h) {
      const double e = d.uv - ratio * d.vv;
      sres += e * e;
    }
  }
  const double nh = static_cast<double>(hits);
  const double se = std::sqrt(sres / (nh - 1.0) / nh) / (svv / nh);
  return {analytic, ratio, se, hits, h, drawn};
}

}  // namespace selest
