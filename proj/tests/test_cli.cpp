#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "selest/cli.hpp"

using selest::cli::run_cli;
namespace fs = std::filesystem;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = run_cli(std::move(args), out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(is), {}};
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "selest_cli_test";
  fs::create_directories(dir);
  return dir / name;
}

}  // namespace

TEST(Cli, MinimaxBest) {
  const auto r = run({"minimax", "--n", "3", "--target", "best"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("minimax_c=0.0894095935"), std::string::npos);
  EXPECT_NE(r.out.find("admissible_lo=0.0666"), std::string::npos);
}

TEST(Cli, MinimaxWorstSupRisk) {
  const auto r = run({"minimax", "--n", "3", "--target", "worst"});
  const double k2 = 1.0 / 15;
  const double sup = 2.0 * 2 * 5 * k2 * k2 - 4.0 * 2 * k2 / 3 + 2.0 / 9;
  EXPECT_NE(r.out.find("sup_risk=" + selest::cli::num(sup)), std::string::npos) << r.out;
}

TEST(Cli, AnalyticRiskRow) {
  const auto r = run({"risk-curve", "--estimators", "linear:c=0.0667", "--n", "3", "--mode", "analytic",
                      "--mu-max", "0"});
  EXPECT_EQ(r.code, 0);
  std::istringstream is(r.out);
  std::string header, row;
  std::getline(is, header);
  std::getline(is, row);
  EXPECT_EQ(header, "target,estimator,n,mu,mode,risk,se\r");
  EXPECT_EQ(row.substr(0, 41), "best,best:linear:c=0.0667,3,0,analytic,0.");
  const double risk = std::stod(row.substr(row.find("analytic,") + 9));
  EXPECT_NEAR(risk, 0.21111, 1e-4);
  EXPECT_EQ(row.back(), '\r');
  EXPECT_EQ(row[row.size() - 2], ',');
}

TEST(Cli, AnalyticRejectsNonLinear) {
  const auto r = run({"risk-curve", "--estimators", "umvue", "--mode", "analytic"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("no closed-form risk"), std::string::npos);
}

TEST(Cli, ParseErrorShowsGrammar) {
  const auto r = run({"risk-curve", "--estimators", "linear:c=zz", "--mode", "analytic"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.err.find("spec    :="), std::string::npos);
}

TEST(Cli, DominateExitCodes) {
  const std::vector<std::string> grid{"--mu-max", "6", "--mu-step", "1", "--reps", "20000"};
  auto with = [&](std::vector<std::string> a) {
    a.insert(a.end(), grid.begin(), grid.end());
    return run(a).code;
  };
  EXPECT_EQ(with({"dominate", "--base", "worst:linear:c=-0.1", "--challenger", "improved(linear:c=-0.1)"}), 0);
  EXPECT_EQ(with({"dominate", "--base", "best:linear:c=0.0667", "--challenger", "best:linear:c=0.1"}), 3);
  EXPECT_EQ(with({"dominate", "--base", "best:umvue", "--challenger", "best:umvue"}), 2);
  const auto mismatch = run({"dominate", "--base", "best:umvue", "--challenger", "worst:umvue"});
  EXPECT_EQ(mismatch.code, 1);
  EXPECT_NE(mismatch.err.find("share a target"), std::string::npos);
}

TEST(Cli, UmvueCheck) {
  const auto r = run({"umvue-check", "--target", "worst", "--n", "3", "--mu", "2", "--reps", "2000"});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.out.find("selection_weight=0.0676676"), std::string::npos);
  EXPECT_NE(r.out.find("difference="), std::string::npos);
}

TEST(Cli, PsiCommand) {
  const auto best = run({"psi", "--target", "best", "--w", "0.5", "--mu", "0", "--n", "3"});
  EXPECT_NE(best.out.find("psi=0.0694444"), std::string::npos);
  EXPECT_NE(best.out.find("upper_envelope=0.0694444"), std::string::npos);
  const auto worst = run({"psi", "--target", "worst", "--w", "0.2", "--mu", "0", "--n", "3"});
  EXPECT_NE(worst.out.find("psi=0.04444"), std::string::npos);
  EXPECT_NE(worst.out.find("lower_envelope=0.04444"), std::string::npos);
  const auto big = run({"psi", "--target", "best", "--w", "0.2", "--mu", "30", "--n", "3"});
  EXPECT_NE(big.out.find("upper_envelope=unbounded"), std::string::npos);
  const auto val = run({"psi", "--w", "0.5", "--validate"});
  EXPECT_NE(val.out.find("mc_psi="), std::string::npos);
}

TEST(Cli, ConfigFileAndPrecedence) {
  const auto cfg = scratch("run.cfg");
  std::ofstream(cfg) << "# defaults for a small run\nn = 5\ntarget=worst\n";
  const auto from_file = run({"minimax", "--config", cfg.string()});
  EXPECT_NE(from_file.out.find("n=5"), std::string::npos);
  EXPECT_NE(from_file.out.find("target=worst"), std::string::npos);
  const auto flag_wins = run({"minimax", "--config", cfg.string(), "--n", "4"});
  EXPECT_NE(flag_wins.out.find("n=4"), std::string::npos);
  std::ofstream(cfg) << "bogus=1\n";
  EXPECT_NE(run({"minimax", "--config", cfg.string()}).code, 0);
}

TEST(Cli, ManifestReplayIsByteIdentical) {
  const auto csv = scratch("curve.csv");
  const auto svg = scratch("curve.svg");
  const auto a = run({"risk-curve", "--estimators", "linear:c=0,improved(umvue)", "--mode", "both", "--mu-max", "2",
                      "--mu-step", "0.5", "--reps", "3000", "--out", csv.string(), "--svg", svg.string(),
                      "--workers", "1"});
  ASSERT_EQ(a.code, 0) << a.err;
  const auto manifest = csv.string() + ".manifest";
  const std::string text = slurp(manifest);
  for (const char* key : {"command=risk-curve", "version=", "seed=20240601", "timestamp=", "config.reps=3000"}) {
    EXPECT_NE(text.find(key), std::string::npos) << key;
  }
  const std::string first_csv = slurp(csv);
  const std::string first_svg = slurp(svg);
  const auto again = scratch("curve2.csv");
  ASSERT_EQ(run({"replay", manifest, "--out", again.string(), "--workers", "4"}).code, 0);
  EXPECT_EQ(slurp(again), first_csv);
  EXPECT_EQ(slurp(svg), first_svg);
  EXPECT_EQ(first_svg.find("<svg"), 0u);
  EXPECT_NE(first_svg.find("viewBox=\"0 0 800 600\""), std::string::npos);
  EXPECT_EQ(first_svg.find(":20"), std::string::npos);  // no clock time inside the drawing
}

TEST(Cli, GridConstruction) {
  const auto g = selest::cli::make_grid(0, 6, 0.1);
  EXPECT_EQ(g.size(), 61u);
  EXPECT_NEAR(g.back(), 6.0, 1e-12);
  EXPECT_THROW(selest::cli::make_grid(0, 1, 0), selest::cli::UsageError);
  EXPECT_EQ(selest::cli::split_specs("linear:c=0, improved(linear:c=1),umvue").size(), 3u);
}
