#include <filesystem>
#include <fstream>
#include <iterator>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "cli.hpp"
#include "roa/config.hpp"
#include "roa/heatmap.hpp"
#include "roa/metrics.hpp"
#include "roa/redesign.hpp"

namespace roa {
namespace {

namespace fs = std::filesystem;

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::path(testing::TempDir()) / "experiment_test" / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

std::string read_all(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RedesignConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in, "test.cfg");
}

// Small enough to run end to end in a few seconds.
const char* kTinyConfig = R"(# tiny run
n_theta = 30
n_omega = 30
pretrain_steps = 200
m_iterations = 2
sgd_steps_roa = 5
sgd_steps_policy = 5
oracle_k_max = 400
oracle_confirm_steps = 20
net_width = 16
lr_roa = 1e-4
phases = 2
)";

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr, std::string* err_text = nullptr) {
  std::vector<const char*> argv{"roa"};
  for (const std::string& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text != nullptr) *out_text = out.str();
  if (err_text != nullptr) *err_text = err.str();
  return code;
}

TEST(ConfigTest, EmptyFileGivesDefaults) {
  const RedesignConfig cfg = parse("");
  EXPECT_EQ(cfg.phases, 20);
  EXPECT_EQ(cfg.roa.gamma, 4.0);
  EXPECT_EQ(cfg.roa.beta, 0.6);
  EXPECT_EQ(cfg.roa.iterations, 20);
  EXPECT_EQ(cfg.roa.lambda_roa, 1000.0);
  EXPECT_EQ(cfg.roa.lambda_monot, 0.01);
  EXPECT_EQ(cfg.policy.lambda_u, 10.0);
  EXPECT_EQ(cfg.policy.sgd_steps, 100);
  EXPECT_EQ(cfg.pendulum.g, 0.81);
  EXPECT_EQ(cfg.grid.n_theta, 100);
  EXPECT_EQ(cfg.variant, Variant::kThresholds);
}

TEST(ConfigTest, ParsesValuesAndComments) {
  const RedesignConfig cfg = parse("# comment\n\ngamma_r = 4   # trailing\nvariant=slopes\nmonot = false\nseed = 7\n");
  EXPECT_EQ(cfg.roa.gamma, 4.0);
  EXPECT_EQ(cfg.variant, Variant::kSlopes);
  EXPECT_FALSE(cfg.monot);
  EXPECT_EQ(cfg.seed, 7u);
  EXPECT_EQ(cfg.roa_hyper(1).lambda_monot, 0.0);
}

TEST(ConfigTest, RejectsInvariantViolationNamingKeyAndLine) {
  try {
    parse("seed = 1\ngamma_r = 0.5\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "gamma_r");
    EXPECT_EQ(e.line(), 2);
    EXPECT_NE(std::string(e.what()).find("test.cfg:2"), std::string::npos);
  }
}

TEST(ConfigTest, RejectsUnknownAndMalformed) {
  try {
    parse("\n\nbogus_key = 3\n");
    FAIL() << "expected ConfigError";
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.key(), "bogus_key");
    EXPECT_EQ(e.line(), 3);
  }
  EXPECT_THROW(parse("phases = two\n"), ConfigError);
  EXPECT_THROW(parse("phases = 2.5\n"), ConfigError);
  EXPECT_THROW(parse("just some words\n"), ConfigError);
  EXPECT_THROW(parse("phases = 3\nphases = 4\n"), ConfigError);
  EXPECT_THROW(parse("sat_a = -0.3\nsat_b = 0.2\n"), ConfigError);
}

TEST(ConfigTest, DumpRoundTrips) {
  RedesignConfig cfg = parse("gamma_r = 3.25\nlr_policy = 0.003\nvariant = slopes\nn_theta = 64\n");
  const std::string dumped = dump_config(cfg);
  const RedesignConfig back = parse(dumped);
  EXPECT_EQ(dump_config(back), dumped);
  for (const ConfigKey& k : config_keys()) {
    EXPECT_EQ(get_config_value(back, k.name), get_config_value(cfg, k.name)) << k.name;
    EXPECT_FALSE(k.doc.empty()) << k.name;
  }
}

TEST(ConfigTest, PhaseSchedules) {
  RedesignConfig cfg;
  cfg.n_init = 10;
  cfg.n_increment = 5;
  EXPECT_EQ(cfg.roa_hyper(1).n_samples, 10);
  EXPECT_EQ(cfg.roa_hyper(3).n_samples, 20);
  EXPECT_EQ(cfg.policy_hyper(3).n_samples, 20);
  cfg.variant = Variant::kSlopes;
  const SatPolicy p = cfg.initial_policy();
  EXPECT_EQ(p.psi.trainable_params(), (std::vector<SatParam>{SatParam::kUpperSlope, SatParam::kLowerSlope}));
  EXPECT_EQ(p.psi.a, 0.2);
  EXPECT_EQ(p.psi.b, -0.2);
}

TEST(MetricsTest, HeaderAndLocaleFreeRows) {
  const fs::path dir = scratch("metrics");
  {
    MetricsWriter w((dir / "m.csv").string());
    MetricsRow r;
    r.kind = "growth";
    r.phase = 1;
    r.iteration = 2;
    r.c = 0.125;
    r.gap_empty = true;
    w.write(r);
  }
  std::ifstream in(dir / "m.csv");
  std::string line;
  std::getline(in, line);
  EXPECT_EQ(line, kMetricsVersionLine);
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 22), "kind,phase,iteration,n");
  std::getline(in, line);
  EXPECT_EQ(line.substr(0, 13), "growth,1,2,,,");
  EXPECT_NE(line.find(",0.125,"), std::string::npos);

  const MetricsTable t = read_metrics((dir / "m.csv").string());
  ASSERT_EQ(t.rows.size(), 1u);
  EXPECT_EQ(t.values("c", t.rows_of("growth"))[0], 0.125);
  EXPECT_TRUE(std::isnan(t.values("a", t.rows_of("growth"))[0]));
  EXPECT_THROW(t.column_index("nope"), std::exception);
}

TEST(MetricsTest, RejectsUnversionedFile) {
  const fs::path dir = scratch("metrics_bad");
  std::ofstream(dir / "m.csv") << "kind,phase\ngrowth,1\n";
  EXPECT_THROW(read_metrics((dir / "m.csv").string()), std::runtime_error);
}

TEST(HeatmapTest, AllFalseIsUniformBackground) {
  const GridDomain g;
  const RoaMask none(g);
  const fs::path dir = scratch("heat_empty");
  write_overlay_ppm(none, none, none, (dir / "h.ppm").string());
  const std::string s = read_all(dir / "h.ppm");
  const std::string header = "P6\n100 100\n255\n";
  ASSERT_EQ(s.size(), header.size() + 3 * 10000);
  EXPECT_EQ(s.substr(0, header.size()), header);
  for (std::size_t i = header.size(); i < s.size(); ++i) EXPECT_EQ(static_cast<unsigned char>(s[i]), 255);
}

TEST(HeatmapTest, ThreeCellsGiveThreeColoredPixels) {
  const GridDomain g;
  RoaMask boundary(g), estimate(g), gap(g);
  boundary.set(g.index(5, 0), true);
  estimate.set(g.index(50, 50), true);
  gap.set(g.index(99, 99), true);
  const std::vector<Rgb> px = overlay_pixels(boundary, estimate, gap);
  int colored = 0;
  for (const Rgb& p : px) colored += p != kBackground ? 1 : 0;
  EXPECT_EQ(colored, 3);
  EXPECT_EQ(px[static_cast<std::size_t>(g.index(5, 0))], kOracleBoundary);
  EXPECT_EQ(px[static_cast<std::size_t>(g.index(50, 50))], kEstimate);
  EXPECT_EQ(px[static_cast<std::size_t>(g.index(99, 99))], kGap);
}

TEST(HeatmapTest, BoundaryOfFilledBlock) {
  GridDomain g;
  g.n_theta = 5;
  g.n_omega = 5;
  RoaMask m(g);
  for (int i = 1; i <= 3; ++i)
    for (int j = 1; j <= 3; ++j) m.set(g.index(i, j), true);
  const RoaMask b = mask_boundary(m);
  EXPECT_EQ(b.count(), 8);
  EXPECT_FALSE(b.at(g.index(2, 2)));
}

TEST(HeatmapTest, OutputIsDeterministic) {
  const GridDomain g;
  RoaMask oracle(g), est(g), gap(g);
  for (int i = 0; i < g.size(); i += 7) oracle.set(i, true);
  for (int i = 0; i < g.size(); i += 11) est.set(i, true);
  for (int i = 0; i < g.size(); i += 13) gap.set(i, true);
  const fs::path dir = scratch("heat_det");
  write_overlay_ppm(oracle, est, gap, (dir / "a.ppm").string());
  write_overlay_ppm(oracle, est, gap, (dir / "b.ppm").string());
  EXPECT_EQ(read_all(dir / "a.ppm"), read_all(dir / "b.ppm"));
  EXPECT_THROW(overlay_pixels(oracle, RoaMask(GridDomain{.n_theta = 5, .n_omega = 5}), gap), GridMismatch);
}

TEST(CliTest, UsageErrorsExitTwo) {
  std::string err;
  EXPECT_EQ(run_cli({}, nullptr, &err), kExitUsage);
  EXPECT_EQ(run_cli({"fly"}), kExitUsage);
  EXPECT_EQ(run_cli({"run", "--variant", "both"}), kExitUsage);
  EXPECT_EQ(run_cli({"run", "--seed", "x"}), kExitUsage);
  EXPECT_EQ(run_cli({"--help"}), kExitOk);
}

TEST(CliTest, BadConfigExitsOne) {
  const fs::path dir = scratch("cli_bad");
  std::ofstream(dir / "c.cfg") << "gamma_r = 0.5\n";
  std::string err;
  EXPECT_EQ(run_cli({"oracle", "--config", (dir / "c.cfg").string()}, nullptr, &err), kExitFailure);
  EXPECT_NE(err.find("gamma_r"), std::string::npos);
  EXPECT_NE(err.find(":1:"), std::string::npos);
  EXPECT_EQ(run_cli({"oracle", "--config", (dir / "missing.cfg").string()}), kExitFailure);
}

TEST(CliTest, OraclePrintsFraction) {
  const fs::path dir = scratch("cli_oracle");
  std::ofstream(dir / "c.cfg") << kTinyConfig;
  std::string out;
  ASSERT_EQ(run_cli({"oracle", "--config", (dir / "c.cfg").string(), "--out", dir.string()}, &out), kExitOk);
  const double frac = std::stod(out);
  EXPECT_GT(frac, 0.0);
  EXPECT_LT(frac, 1.0);
  EXPECT_TRUE(fs::exists(dir / "oracle.pgm"));
  EXPECT_TRUE(fs::exists(dir / "oracle.csv"));
}

TEST(RunTest, IdenticalSeedsGiveIdenticalOutputs) {
  const fs::path dir = scratch("run_det");
  std::ofstream(dir / "c.cfg") << kTinyConfig;
  const std::string cfg = (dir / "c.cfg").string();
  ASSERT_EQ(run_cli({"run", "--config", cfg, "--seed", "1", "--out", (dir / "a").string()}), kExitOk);
  ASSERT_EQ(run_cli({"run", "--config", cfg, "--seed", "1", "--out", (dir / "b").string()}), kExitOk);
  const std::string a = read_all(dir / "a" / "metrics.csv");
  EXPECT_FALSE(a.empty());
  EXPECT_EQ(a, read_all(dir / "b" / "metrics.csv"));
  EXPECT_EQ(read_all(dir / "a" / "checkpoints" / "net_phase_02.txt"),
            read_all(dir / "b" / "checkpoints" / "net_phase_02.txt"));
  EXPECT_EQ(read_all(dir / "a" / "heatmaps" / "roa_02.ppm"), read_all(dir / "b" / "heatmaps" / "roa_02.ppm"));

  const MetricsTable t = read_metrics((dir / "a" / "metrics.csv").string());
  EXPECT_EQ(t.rows_of("pretrain").size(), 1u);
  EXPECT_EQ(t.rows_of("baseline").size(), 1u);
  EXPECT_EQ(t.rows_of("growth").size(), 4u);
  EXPECT_EQ(t.rows_of("policy").size(), 2u);

  std::string out;
  ASSERT_EQ(run_cli({"report", "--out", (dir / "a").string()}, &out), kExitOk);
  EXPECT_TRUE(fs::exists(dir / "a" / "figures" / "fig_fraction_trace.csv"));
  EXPECT_TRUE(fs::exists(dir / "a" / "figures" / "fig_psi_trace.csv"));
}

TEST(RunTest, NoMonotFlagZeroesTheTerm) {
  const fs::path dir = scratch("run_nomonot");
  std::string text = kTinyConfig;
  text.replace(text.find("phases = 2"), 10, "phases = 1");
  std::ofstream(dir / "c.cfg") << text;
  ASSERT_EQ(run_cli({"run", "--config", (dir / "c.cfg").string(), "--no-monot", "--out", dir.string()}), kExitOk);
  const RedesignConfig dumped = parse_config_file((dir / "config.txt").string());
  EXPECT_FALSE(dumped.monot);
  const MetricsTable t = read_metrics((dir / "metrics.csv").string());
  for (double v : t.values("loss_monot", t.rows_of("growth"))) EXPECT_EQ(v, 0.0);
}

TEST(RunTest, ZeroPhasesWritesOnlyPretrainingArtifacts) {
  const fs::path dir = scratch("run_zero");
  RedesignConfig cfg = parse(kTinyConfig);
  cfg.phases = 0;
  cfg.out = dir.string();
  const RedesignResult r = run_redesign(cfg);
  EXPECT_TRUE(r.phases.empty());
  EXPECT_TRUE(fs::exists(dir / "checkpoints" / "net_pretrain.txt"));
  EXPECT_FALSE(fs::exists(dir / "checkpoints" / "net_phase_01.txt"));
  const MetricsTable t = read_metrics((dir / "metrics.csv").string());
  EXPECT_TRUE(t.rows_of("growth").empty());
  EXPECT_TRUE(t.rows_of("policy").empty());
}

}  // namespace
}  // namespace roa
