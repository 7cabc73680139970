#pragma once

// The selest command line: risk curves (CSV + SVG), minimax coefficients,
// paired domination runs, UMVUE checks, Psi_mu(w) and manifest replay.
// run_cli() is usable in-process so tests can drive it without a shell.

#include <cstdio>
#include <ctime>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "selest/analytic_risk.hpp"
#include "selest/estimators.hpp"
#include "selest/mc_engine.hpp"

namespace selest::cli {

inline constexpr std::string_view kVersion = "0.1.0";

/// Exit codes of `dominate`; other commands use 0 on success and 1 on error.
inline constexpr int kExitDominates = 0;
inline constexpr int kExitInconclusive = 2;
inline constexpr int kExitBaseWins = 3;
inline constexpr int kExitError = 1;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string num(double v) { return detail::format_double(v); }

// ---------------------------------------------------------------------------
// Grid, CSV, SVG

inline std::vector<double> make_grid(double lo, double hi, double step) {
  if (!(step > 0.0)) throw UsageError("--mu-step must be > 0");
  if (!(lo >= 0.0) || !(hi >= lo)) throw UsageError("need 0 <= --mu-min <= --mu-max");
  std::vector<double> grid;
  const auto count = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
  for (long i = 0; i <= count; ++i) grid.push_back(lo + static_cast<double>(i) * step);
  return grid;
}

struct CurveRow {
  std::string target;
  std::string estimator;
  int n;
  double mu;
  std::string mode;
  double risk;
  std::optional<double> se;
};

inline std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) {
    if (ch == '"') out += '"';
    out += ch;
  }
  return out + "\"";
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurveRow>& rows) {
  os << "target,estimator,n,mu,mode,risk,se\r\n";
  for (const auto& r : rows) {
    os << r.target << ',' << csv_field(r.estimator) << ',' << r.n << ',' << num(r.mu) << ',' << r.mode << ','
       << num(r.risk) << ',' << (r.se ? num(*r.se) : "") << "\r\n";
  }
}

inline std::string fixed(double v, int digits) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

/// One polyline per (estimator, mode) series on a fixed 800x600 canvas.
inline void write_curve_svg(std::ostream& os, const std::vector<CurveRow>& rows, const std::string& title) {
  constexpr double W = 800, H = 600, left = 80, right = 250, top = 50, bottom = 60;
  std::vector<std::string> keys;
  std::map<std::string, std::vector<std::pair<double, double>>> series;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;
  bool first = true;
  for (const auto& r : rows) {
    const std::string key = r.estimator + " (" + r.mode + ")";
    if (!series.count(key)) keys.push_back(key);
    series[key].emplace_back(r.mu, r.risk);
    if (first) {
      xmin = xmax = r.mu;
      ymin = ymax = r.risk;
      first = false;
    }
    xmin = std::min(xmin, r.mu);
    xmax = std::max(xmax, r.mu);
    ymin = std::min(ymin, r.risk);
    ymax = std::max(ymax, r.risk);
  }
  if (xmax <= xmin) xmax = xmin + 1;
  ymin = std::min(ymin, 0.0);
  if (ymax <= ymin) ymax = ymin + 1;
  ymax += 0.05 * (ymax - ymin);
  const double pw = W - left - right;
  const double ph = H - top - bottom;
  auto sx = [&](double x) { return left + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return top + ph - (y - ymin) / (ymax - ymin) * ph; };
  static constexpr const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                            "#9467bd", "#8c564b", "#e377c2", "#17becf"};

  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"800\" height=\"600\" viewBox=\"0 0 800 600\">\n";
  os << "<rect width=\"800\" height=\"600\" fill=\"white\"/>\n";
  os << "<text x=\"" << fixed(left + pw / 2, 1) << "\" y=\"30\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"16\">" << title << "</text>\n";
  os << "<rect x=\"" << fixed(left, 1) << "\" y=\"" << fixed(top, 1) << "\" width=\"" << fixed(pw, 1)
     << "\" height=\"" << fixed(ph, 1) << "\" fill=\"none\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 5; ++i) {
    const double xv = xmin + (xmax - xmin) * i / 5.0;
    const double yv = ymin + (ymax - ymin) * i / 5.0;
    os << "<text x=\"" << fixed(sx(xv), 1) << "\" y=\"" << fixed(top + ph + 20, 1)
       << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << fixed(xv, 2) << "</text>\n";
    os << "<text x=\"" << fixed(left - 8, 1) << "\" y=\"" << fixed(sy(yv) + 4, 1)
       << "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"12\">" << fixed(yv, 4) << "</text>\n";
  }
  os << "<text x=\"" << fixed(left + pw / 2, 1) << "\" y=\"" << fixed(H - 15, 1)
     << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"14\">mu</text>\n";
  os << "<text x=\"20\" y=\"" << fixed(top + ph / 2, 1) << "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
     << "font-size=\"14\" transform=\"rotate(-90 20 " << fixed(top + ph / 2, 1) << ")\">scaled risk</text>\n";
  for (std::size_t i = 0; i < keys.size(); ++i) {
    const char* colour = palette[i % std::size(palette)];
    os << "<polyline fill=\"none\" stroke=\"" << colour << "\" stroke-width=\"1.5\" points=\"";
    bool sep = false;
    for (const auto& [x, y] : series[keys[i]]) {
      os << (sep ? " " : "") << fixed(sx(x), 2) << ',' << fixed(sy(y), 2);
      sep = true;
    }
    os << "\"/>\n";
    const double ly = top + 10 + 20.0 * static_cast<double>(i);
    os << "<line x1=\"" << fixed(W - right + 15, 1) << "\" y1=\"" << fixed(ly, 1) << "\" x2=\""
       << fixed(W - right + 40, 1) << "\" y2=\"" << fixed(ly, 1) << "\" stroke=\"" << colour
       << "\" stroke-width=\"2\"/>\n";
    os << "<text x=\"" << fixed(W - right + 45, 1) << "\" y=\"" << fixed(ly + 4, 1)
       << "\" font-family=\"sans-serif\" font-size=\"11\">" << keys[i] << "</text>\n";
  }
  os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Manifests and config files

struct Manifest {
  std::string command;
  std::map<std::string, std::string> info;
  std::vector<std::pair<std::string, std::string>> config;
};

inline std::string utc_timestamp() {
  const std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

inline void write_manifest(const std::string& path, const Manifest& m) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot write manifest " + path);
  os << "command=" << m.command << '\n';
  for (const auto& [k, v] : m.info) os << k << '=' << v << '\n';
  for (const auto& [k, v] : m.config) os << "config." << k << '=' << v << '\n';
}

inline std::vector<std::pair<std::string, std::string>> read_key_values(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw UsageError("cannot open " + path);
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    const auto start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(lineno) + ": expected key=value");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
  }
  return out;
}

inline Manifest read_manifest(const std::string& path) {
  Manifest m;
  for (auto& [k, v] : read_key_values(path)) {
    if (k == "command") {
      m.command = v;
    } else if (k.rfind("config.", 0) == 0) {
      m.config.emplace_back(k.substr(7), v);
    } else {
      m.info[k] = v;
    }
  }
  if (m.command.empty()) throw UsageError("manifest " + path + " has no command line");
  return m;
}

// ---------------------------------------------------------------------------
// Commands

struct Common {
  std::string out;
  int workers = 0;
};

struct GridOptions {
  int n = 3;
  double mu_min = 0.0;
  double mu_max = 6.0;
  double mu_step = 0.1;
  int reps = 20000;
  std::uint64_t seed = 20240601;
};

struct RiskCurveOptions {
  std::string target = "best";
  std::string estimators;
  std::string mode = "mc";
  std::string svg;
  GridOptions grid;
};

struct DominateOptions {
  std::string target;
  std::string base;
  std::string challenger;
  GridOptions grid;
};

struct UmvueOptions {
  std::string target = "best";
  int n = 3;
  double mu = 0.0;
  int reps = 20000;
  std::uint64_t seed = 20240601;
  double sigma = 1.0;
  double theta1 = 0.0;
};

struct PsiOptions {
  std::string target = "best";
  double w = 0.5;
  double mu = 0.0;
  int n = 3;
  bool validate = false;
  long long budget = 20'000'000;
  std::uint64_t seed = 20240601;
};

struct MinimaxOptions {
  std::string target = "best";
  int n = 3;
};

inline Target parse_target(const std::string& s) {
  if (s == "best") return Target::Best;
  if (s == "worst") return Target::Worst;
  throw UsageError("--target must be 'best' or 'worst'");
}

inline std::vector<std::string> split_specs(const std::string& list) {
  // commas inside improved(...) belong to the inner spec
  std::vector<std::string> out;
  std::string cur;
  int depth = 0;
  for (char ch : list) {
    if (ch == '(') ++depth;
    if (ch == ')') --depth;
    if (ch == ',' && depth == 0) {
      if (!cur.empty()) out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  if (!cur.empty()) out.push_back(cur);
  return out;
}

inline McConfig mc_config(const GridOptions& g) {
  McConfig cfg;
  cfg.replicates = g.reps;
  cfg.seed = g.seed;
  cfg.n = g.n;
  cfg.mu_grid = make_grid(g.mu_min, g.mu_max, g.mu_step);
  return cfg;
}

inline std::vector<CurveRow> risk_curve_rows(const RiskCurveOptions& o, int workers) {
  const Target target = parse_target(o.target);
  if (o.mode != "analytic" && o.mode != "mc" && o.mode != "both") {
    throw UsageError("--mode must be analytic, mc or both");
  }
  const auto names = split_specs(o.estimators);
  if (names.empty()) throw UsageError("--estimators is empty");
  const McConfig cfg = mc_config(o.grid);
  std::vector<EstimatorSpec> specs;
  for (const auto& name : names) {
    specs.push_back(parse_spec(name, target));
    if (o.mode == "analytic" && !is_linear(specs.back())) {
      throw UsageError("estimator '" + name + "': no closed-form risk exists for this estimator; use --mode mc");
    }
  }
  std::vector<CurveRow> rows;
  for (std::size_t i = 0; i < specs.size(); ++i) {
    const auto& spec = specs[i];
    const std::string label = to_string(spec);
    if (o.mode != "mc" && is_linear(spec)) {
      const double c = resolve(spec, cfg.n).c;
      for (double mu : cfg.mu_grid) {
        rows.push_back({o.target, label, cfg.n, mu, "analytic",
                        risk_linear(c, NormalizedGap(mu), cfg.n, target).value, std::nullopt});
      }
    }
    if (o.mode != "analytic") {
      for (const auto& p : estimate_risk(spec, cfg, workers).points) {
        rows.push_back({o.target, label, cfg.n, p.mu, "mc", p.value, p.se});
      }
    }
  }
  return rows;
}

inline void cmd_risk_curve(const RiskCurveOptions& o, const Common& c, std::ostream& out) {
  const auto rows = risk_curve_rows(o, c.workers);
  write_curve_csv(out, rows);
  if (!o.svg.empty()) {
    std::ofstream svg(o.svg, std::ios::binary);
    if (!svg) throw std::runtime_error("cannot write " + o.svg);
    write_curve_svg(svg, rows, "scaled risk, target " + o.target + ", n = " + std::to_string(o.grid.n));
  }
}

inline void cmd_minimax(const MinimaxOptions& o, std::ostream& out) {
  const Target target = parse_target(o.target);
  const double c = minimax_c(o.n, target);
  const auto iv = admissible_interval(o.n, target);
  out << "target=" << o.target << "\nn=" << o.n << "\nminimax_c=" << num(c) << "\nadmissible_lo=" << num(iv.lo)
      << "\nadmissible_hi=" << num(iv.hi) << "\nsup_risk=" << num(sup_risk_linear(c, o.n, target)) << '\n';
}

inline int cmd_dominate(const DominateOptions& o, const Common& c, std::ostream& out, std::ostream& err) {
  std::optional<Target> target;
  if (!o.target.empty()) target = parse_target(o.target);
  const EstimatorSpec base = parse_spec(o.base, target);
  const bool prefixed = o.challenger.rfind("best:", 0) == 0 || o.challenger.rfind("worst:", 0) == 0;
  const EstimatorSpec challenger =
      parse_spec(o.challenger, target || prefixed ? target : std::optional<Target>(base.target));
  if (base.target != challenger.target) throw UsageError("--base and --challenger must share a target");
  const auto report = compare_domination(base, challenger, mc_config(o.grid), c.workers);
  out << "target,base,challenger,n,mu,base_risk,challenger_risk,diff,se,verdict\r\n";
  for (const auto& p : report.points) {
    out << to_string(base.target) << ',' << csv_field(to_string(base)) << ',' << csv_field(to_string(challenger))
        << ',' << o.grid.n << ',' << num(p.mu) << ',' << num(p.base_risk) << ',' << num(p.challenger_risk) << ','
        << num(p.mean_diff) << ',' << num(p.se) << ',' << to_string(p.verdict) << "\r\n";
  }
  err << "overall: " << to_string(report.overall) << '\n';
  switch (report.overall) {
    case Overall::Dominates: return kExitDominates;
    case Overall::BaseWins: return kExitBaseWins;
    default: return kExitInconclusive;
  }
}

inline void cmd_umvue_check(const UmvueOptions& o, const Common& c, std::ostream& out) {
  const Target target = parse_target(o.target);
  McConfig cfg;
  cfg.replicates = o.reps;
  cfg.seed = o.seed;
  cfg.n = o.n;
  cfg.mu_grid = {o.mu};
  cfg.sigma = o.sigma;
  cfg.theta1 = o.theta1;
  const auto p = estimate_mean(EstimatorSpec{target, Umvue{}}, cfg, c.workers).front();
  out << "target=" << o.target << "\nn=" << o.n << "\nmu=" << num(o.mu) << "\nmc_mean=" << num(p.mean)
      << "\nexpected_target=" << num(p.expected_target)
      << "\nselection_weight=" << num(selection_weight(NormalizedGap(o.mu), target))
      << "\ndifference=" << num(p.mean - p.expected_target) << "\nse=" << num(p.se) << '\n';
}

inline void cmd_psi(const PsiOptions& o, std::ostream& out) {
  const Target target = parse_target(o.target);
  const double value = psi_mu(o.w, NormalizedGap(o.mu), o.n, target);
  const auto env = psi_envelopes(o.w, o.n, target);
  out << "target=" << o.target << "\nn=" << o.n << "\nw=" << num(o.w) << "\nmu=" << num(o.mu)
      << "\npsi=" << num(value) << "\nlower_envelope=" << num(env.lower)
      << "\nupper_envelope=" << (env.upper.is_unbounded() ? std::string("unbounded") : num(env.upper.value()))
      << '\n';
  if (o.validate) {
    PsiValidationOptions vo;
    vo.seed = o.seed;
    vo.budget = o.budget;
    const auto v = validate_psi(o.w, NormalizedGap(o.mu), o.n, target, vo);
    out << "mc_psi=" << num(v.empirical) << "\nmc_se=" << num(v.se) << "\nmc_hits=" << v.hits
        << "\nmc_half_width=" << num(v.half_width) << "\nmc_replicates=" << v.replicates << '\n';
  }
}

// ---------------------------------------------------------------------------
// Parsing and dispatch

namespace detail {

inline void add_grid(CLI::App* app, GridOptions& g) {
  app->add_option("--n", g.n, "sample size per population")->check(CLI::Range(2, 100000));
  app->add_option("--mu-min", g.mu_min, "first normalized gap");
  app->add_option("--mu-max", g.mu_max, "last normalized gap");
  app->add_option("--mu-step", g.mu_step, "grid spacing");
  app->add_option("--reps", g.reps, "Monte Carlo replicates per grid point")->check(CLI::PositiveNumber);
  app->add_option("--seed", g.seed, "root seed");
}

// Values of every option of `app` in canonical key=value form. Flags are
// written as true/false.
inline std::vector<std::pair<std::string, std::string>> resolved_options(const CLI::App* app) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const CLI::Option* opt : app->get_options()) {
    const std::string name = opt->get_single_name();
    if (name == "help" || name == "config" || name == "workers") continue;
    std::string value;
    if (opt->get_expected_min() == 0) {
      value = opt->count() > 0 ? opt->as<std::string>() : "false";
      if (value != "false" && value != "0") value = "true";
    } else if (opt->count() > 0) {
      value = opt->results().back();
    } else {
      value = opt->get_default_str();
    }
    out.emplace_back(name, value);
  }
  return out;
}

// Pulls "--config <path>" / "--config=<path>" out of the argument list.
inline std::optional<std::string> extract_config(std::vector<std::string>& args) {
  std::optional<std::string> path;
  for (std::size_t i = 0; i < args.size();) {
    if (args[i] == "--config" && i + 1 < args.size()) {
      path = args[i + 1];
      args.erase(args.begin() + static_cast<long>(i), args.begin() + static_cast<long>(i) + 2);
    } else if (args[i].rfind("--config=", 0) == 0) {
      path = args[i].substr(9);
      args.erase(args.begin() + static_cast<long>(i));
    } else {
      ++i;
    }
  }
  return path;
}

inline std::vector<std::string> as_flags(const std::vector<std::pair<std::string, std::string>>& kv) {
  std::vector<std::string> out;
  for (const auto& [k, v] : kv) out.push_back("--" + k + "=" + v);
  return out;
}

}  // namespace detail

/// Runs one invocation; `args` excludes the program name. Output files go to
/// --out (with a manifest beside them) or, without --out, to `out`.
inline int run_cli(std::vector<std::string> args, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  // config values are inserted right after the subcommand so later flags win
  std::vector<std::string> config_flags;
  try {
    if (auto path = detail::extract_config(args)) config_flags = detail::as_flags(read_key_values(*path));
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  CLI::App app{"Estimation after selection for two exponential populations"};
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast)->always_capture_default();
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kVersion));
  app.footer(std::string(kSpecGrammar) + "\nenvironment: SELEST_WORKERS sets the default worker count");

  Common common;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--out", common.out, "output file; a <out>.manifest is written beside it");
    sub->add_option("--workers", common.workers, "worker threads (default: SELEST_WORKERS or all cores)");
    sub->add_option("--config", "key=value file; flags override it");
  };

  RiskCurveOptions rc;
  auto* risk = app.add_subcommand("risk-curve", "scaled risk over a mu grid, CSV and optional SVG");
  risk->add_option("--target", rc.target)->check(CLI::IsMember({"best", "worst"}));
  risk->add_option("--estimators", rc.estimators, "comma list of estimator specs")->required();
  risk->add_option("--mode", rc.mode)->check(CLI::IsMember({"analytic", "mc", "both"}));
  risk->add_option("--svg", rc.svg, "also draw the curves to this SVG file");
  detail::add_grid(risk, rc.grid);
  add_common(risk);

  MinimaxOptions mm;
  auto* minimax = app.add_subcommand("minimax", "restricted minimax coefficient and its sup-risk");
  minimax->add_option("--target", mm.target)->check(CLI::IsMember({"best", "worst"}));
  minimax->add_option("--n", mm.n)->check(CLI::Range(2, 100000));
  add_common(minimax);

  DominateOptions dm;
  auto* dominate = app.add_subcommand("dominate", "paired comparison; exit 0 dominates, 2 inconclusive, 3 base wins");
  dominate->add_option("--target", dm.target, "target for specs without a prefix");
  dominate->add_option("--base", dm.base)->required();
  dominate->add_option("--challenger", dm.challenger)->required();
  detail::add_grid(dominate, dm.grid);
  add_common(dominate);

  UmvueOptions um;
  auto* umvue = app.add_subcommand("umvue-check", "MC mean of the UMVUE against its expected target");
  umvue->add_option("--target", um.target)->check(CLI::IsMember({"best", "worst"}));
  umvue->add_option("--n", um.n)->check(CLI::Range(2, 100000));
  umvue->add_option("--mu", um.mu)->check(CLI::NonNegativeNumber);
  umvue->add_option("--reps", um.reps)->check(CLI::PositiveNumber);
  umvue->add_option("--seed", um.seed);
  umvue->add_option("--sigma", um.sigma)->check(CLI::PositiveNumber);
  umvue->add_option("--theta1", um.theta1);
  add_common(umvue);

  PsiOptions ps;
  auto* psi = app.add_subcommand("psi", "Psi_mu(w) with its envelopes, optionally checked by conditional MC");
  psi->add_option("--target", ps.target)->check(CLI::IsMember({"best", "worst"}));
  psi->add_option("--w", ps.w)->check(CLI::PositiveNumber);
  psi->add_option("--mu", ps.mu)->check(CLI::NonNegativeNumber);
  psi->add_option("--n", ps.n)->check(CLI::Range(2, 100000));
  psi->add_flag("--validate", ps.validate, "add a conditional Monte Carlo estimate");
  psi->add_option("--budget", ps.budget, "replicate budget for --validate")->check(CLI::PositiveNumber);
  psi->add_option("--seed", ps.seed);
  add_common(psi);

  std::string manifest_path;
  std::string replay_out;
  auto* replay = app.add_subcommand("replay", "re-run the command recorded in a manifest");
  replay->add_option("manifest", manifest_path, "path to a .manifest file")->required();
  replay->add_option("--out", replay_out, "write to this path instead of the recorded one");
  replay->add_option("--workers", common.workers);

  if (!args.empty() && !config_flags.empty()) {
    args.insert(args.begin() + 1, config_flags.begin(), config_flags.end());
  }
  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err);
  }

  if (replay->parsed()) {
    try {
      const Manifest m = read_manifest(manifest_path);
      std::vector<std::string> again{m.command};
      for (const auto& [k, v] : m.config) {
        if (v.empty() || (k == "out" && !replay_out.empty())) continue;
        again.push_back("--" + k + "=" + v);
      }
      if (!replay_out.empty()) again.push_back("--out=" + replay_out);
      if (common.workers > 0) again.push_back("--workers=" + std::to_string(common.workers));
      return run_cli(again, out, err);
    } catch (const std::exception& e) {
      err << "error: " << e.what() << '\n';
      return kExitError;
    }
  }

  CLI::App* sub = app.get_subcommands().front();
  std::ostringstream buffer;
  int code = 0;
  try {
    if (sub == risk) {
      cmd_risk_curve(rc, common, buffer);
    } else if (sub == minimax) {
      cmd_minimax(mm, buffer);
    } else if (sub == dominate) {
      code = cmd_dominate(dm, common, buffer, err);
    } else if (sub == umvue) {
      cmd_umvue_check(um, common, buffer);
    } else {
      cmd_psi(ps, buffer);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitError;
  }

  if (common.out.empty()) {
    out << buffer.str();
    return code;
  }
  std::ofstream file(common.out, std::ios::binary);
  if (!file) {
    err << "error: cannot write " << common.out << '\n';
    return kExitError;
  }
  file << buffer.str();
  Manifest m;
  m.command = sub->get_name();
  m.info["version"] = std::string(kVersion);
  m.info["timestamp"] = utc_timestamp();
  m.info["workers"] = std::to_string(common.workers > 0 ? common.workers : default_workers());
  m.config = detail::resolved_options(sub);
  for (const auto& [k, v] : m.config) {
    if (k == "seed") m.info["seed"] = v;
  }
  write_manifest(common.out + ".manifest", m);
  return code;
}

inline int run_cli(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run_cli(std::vector<std::string>(argv + 1, argv + argc), out, err);
}

}  // namespace selest::cli
