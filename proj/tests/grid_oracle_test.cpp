#include "roa/roa_oracle.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <numbers>
#include <string>

#include <gtest/gtest.h>

#include "roa/grid.hpp"

namespace roa {
namespace {

GridDomain small_grid(int n = 20) {
  GridDomain g;
  g.n_theta = n;
  g.n_omega = n;
  return g;
}

std::string read_all(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::path(testing::TempDir()) / "grid_oracle_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

TEST(GridTest, IndexingIsThetaFastest) {
  const GridDomain g = small_grid(10);
  EXPECT_EQ(g.index(3, 0), 3);
  EXPECT_EQ(g.index(0, 1), 10);
  EXPECT_EQ(g.i_theta(57), 7);
  EXPECT_EQ(g.i_omega(57), 5);
  const StateVec c = g.cell_center(g.index(0, 0));
  EXPECT_NEAR(c.theta, g.theta_min + 0.5 * g.theta_step(), 1e-15);
  EXPECT_NEAR(c.omega, g.omega_min + 0.5 * g.omega_step(), 1e-15);
  for (int i = 0; i < g.size(); ++i) EXPECT_EQ(g.cell_of(g.cell_center(i)), i);
  EXPECT_EQ(g.cell_of({10.0, 0.0}), -1);
}

TEST(GridTest, OriginCellsAndBoundary) {
  const GridDomain g = small_grid(10);
  const std::vector<int> o = g.origin_cells();
  ASSERT_EQ(o.size(), 4u);
  for (int idx : o) {
    EXPECT_NEAR(std::abs(g.cell_center(idx).theta), 0.5 * g.theta_step(), 1e-12);
    EXPECT_NEAR(std::abs(g.cell_center(idx).omega), 0.5 * g.omega_step(), 1e-12);
  }
  EXPECT_TRUE(g.is_boundary(g.index(0, 4)));
  EXPECT_TRUE(g.is_boundary(g.index(4, 9)));
  EXPECT_FALSE(g.is_boundary(g.index(4, 4)));
}

TEST(GridTest, ValidateRejectsEmptyRanges) {
  GridDomain g;
  g.n_theta = 0;
  EXPECT_THROW(g.validate(), std::invalid_argument);
  g = {};
  g.theta_max = g.theta_min;
  EXPECT_THROW(g.validate(), std::invalid_argument);
}

TEST(GridTest, BandMaskIsOpen) {
  GridField f{small_grid(2), {0.0, 1.0, 2.0, 3.0}};
  const RoaMask m = band_mask(f, 1.0, 3.0);
  EXPECT_EQ(m.cells, (std::vector<std::uint8_t>{0, 0, 1, 0}));
  EXPECT_EQ(band_mask(f, -INFINITY, 2.0).count(), 2);
}

TEST(OracleTest, ContractionConvergesEverywhere) {
  const LinearMap f(0.5 * Eigen::Matrix2d::Identity());
  EXPECT_DOUBLE_EQ(true_roa(f, small_grid()).fraction(), 1.0);
}

TEST(OracleTest, OpenLoopPendulumConvergesAlmostNowhere) {
  SatPolicy open;
  open.K.setZero();
  const RoaMask m = true_roa(closed_loop(open, PendulumParams{}), GridDomain{});
  EXPECT_LT(m.fraction(), 0.01);
}

TEST(OracleTest, RotationNeverEntersBall) {
  // Rotation by 90 degrees preserves the norm, so only cells already inside the ball qualify.
  Eigen::Matrix2d r;
  r << 0.0, -1.0, 1.0, 0.0;
  const GridDomain g = small_grid();
  const RoaMask m = true_roa(LinearMap(r), g);
  for (int i = 0; i < g.size(); ++i) EXPECT_EQ(m.at(i), g.cell_center(i).norm() < 0.1);
}

TEST(OracleTest, RequiresConfirmationWindow) {
  // Starting inside the ball is not enough when the state drifts out during confirmation.
  const LinearMap expand(1.05 * Eigen::Matrix2d::Identity());
  OracleOptions opts;
  const SafetyBox box{100.0, 100.0};
  EXPECT_FALSE(converges(expand, {0.05, 0.0}, opts, box));
  opts.confirm_steps = 0;
  EXPECT_TRUE(converges(expand, {0.05, 0.0}, opts, box));
}

TEST(OracleTest, MonotoneInStepBudget) {
  const SatPolicy lqr = [] {
    SatPolicy p;
    p.K = pendulum_lqr_gain(PendulumParams{});
    return p;
  }();
  const PendulumClosedLoop f = closed_loop(lqr, PendulumParams{});
  const GridDomain g = small_grid(40);
  double prev = 0.0;
  for (int k : {50, 200, 800, 2000}) {
    OracleOptions o;
    o.k_max = k;
    const double frac = true_roa(f, g, o).fraction();
    EXPECT_GE(frac, prev);
    prev = frac;
  }
  EXPECT_GT(prev, 0.0);
}

TEST(OracleTest, SetMeasures) {
  const GridDomain g = small_grid(2);
  RoaMask a(g), b(g);
  a.cells = {1, 1, 0, 0};
  b.cells = {0, 1, 1, 0};
  EXPECT_DOUBLE_EQ(sym_diff_measure(a, b), 0.5);
  EXPECT_DOUBLE_EQ(difference_measure(a, b), 0.25);
  EXPECT_DOUBLE_EQ(mask_measure(a), 0.5);
  EXPECT_DOUBLE_EQ(sym_diff_measure(a, a), 0.0);
  EXPECT_DOUBLE_EQ(sym_diff_measure(RoaMask(g, true), RoaMask(g, false)), 1.0);
  EXPECT_THROW(sym_diff_measure(a, RoaMask(small_grid(3))), GridMismatch);
}

TEST(GapGrowthTest, MatchesFirstOrderPredictionAtDefaultResolution) {
  const auto samples = gap_growth_check(1.0, {1.0, 1.05}, GridDomain{});
  EXPECT_DOUBLE_EQ(samples[0].counted, 0.0);
  EXPECT_DOUBLE_EQ(samples[0].predicted, 0.0);
  EXPECT_NEAR(samples[1].predicted, 0.05 * std::numbers::pi, 1e-12);
  EXPECT_LT(samples[1].rel_error, 0.10);
}

TEST(GapGrowthTest, DiscretizationErrorShrinksWithResolution) {
  GridDomain coarse;
  GridDomain fine;
  fine.n_theta = 200;
  fine.n_omega = 200;
  const double e_coarse = gap_growth_check(1.0, {1.05}, coarse)[0].rel_error;
  const double e_fine = gap_growth_check(1.0, {1.05}, fine)[0].rel_error;
  EXPECT_LE(e_fine, 0.75 * e_coarse);
}

TEST(GapGrowthTest, RejectsLevelSetsLeavingTheGrid) {
  EXPECT_THROW(gap_growth_check(4.0, {2.0}, GridDomain{}), std::invalid_argument);
  EXPECT_THROW(gap_growth_check(0.5, {0.5}, GridDomain{}), std::invalid_argument);
}

TEST(MaskIoTest, PgmLayout) {
  GridDomain g = small_grid(2);
  g.n_theta = 3;
  RoaMask m(g);
  m.cells = {1, 0, 0, 0, 0, 1};
  const auto path = scratch("m.pgm");
  write_mask_pgm(m, path.string());
  const std::string s = read_all(path.string());
  const std::string header = "P5\n3 2\n255\n";
  ASSERT_EQ(s.size(), header.size() + 6);
  EXPECT_EQ(s.substr(0, header.size()), header);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size()]), 255);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size() + 1]), 0);
  EXPECT_EQ(static_cast<unsigned char>(s[header.size() + 5]), 255);
}

TEST(MaskIoTest, CsvRows) {
  RoaMask m(small_grid(2));
  m.cells = {0, 1, 0, 0};
  const auto path = scratch("m.csv");
  write_mask_csv(m, path.string());
  std::ifstream in(path);
  std::string line;
  int rows = 0;
  std::getline(in, line);
  EXPECT_EQ(line, "index,theta,omega,value");
  while (std::getline(in, line)) {
    ++rows;
    if (rows == 2) EXPECT_EQ(line.substr(0, 2), "1,");
    EXPECT_EQ(line.back(), rows == 2 ? '1' : '0');
  }
  EXPECT_EQ(rows, 4);
}

}  // namespace
}  // namespace roa
