#include "roa/lyapunov_net.hpp"

#include <cmath>
#include <random>
#include <sstream>

#include <Eigen/Eigenvalues>

#include <gtest/gtest.h>

#include "roa/grid.hpp"
#include "roa/pretrain.hpp"
#include "test_util.hpp"

namespace roa {
namespace {

PDLyapunovNet make_net(std::uint64_t seed, std::vector<int> widths = {2, 16, 16, 16}) {
  std::mt19937_64 rng(seed);
  return PDLyapunovNet::random(rng, widths);
}

TEST(BuildWeightTest, TopBlockIsSymmetricPositiveDefinite) {
  std::mt19937_64 rng(1);
  const PDLyapunovNet net = PDLyapunovNet::random(rng, {2, 5});
  const Eigen::MatrixXd w = build_weight(net.layers()[0]);
  ASSERT_EQ(w.rows(), 5);
  ASSERT_EQ(w.cols(), 2);
  const Eigen::Matrix2d top = w.topRows(2);
  EXPECT_LT((top - top.transpose()).norm(), 1e-15);
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(top);
  EXPECT_GE(es.eigenvalues().minCoeff(), 0.01 - 1e-12);
}

TEST(BuildWeightTest, RejectsBadShapes) {
  PDLayerParams p;
  p.g1 = Eigen::MatrixXd::Ones(2, 2);
  p.g2 = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_THROW(build_weight(p), std::invalid_argument);
  p.g2 = Eigen::MatrixXd::Ones(3, 2);
  p.eps = 0.0;
  EXPECT_THROW(build_weight(p), std::invalid_argument);
}

TEST(NetTest, RejectsContractingWidths) {
  std::mt19937_64 rng(0);
  EXPECT_THROW(PDLyapunovNet::random(rng, {2, 8, 4}), std::invalid_argument);
  EXPECT_THROW(PDLyapunovNet::random(rng, {3, 8}), std::invalid_argument);
}

TEST(NetTest, ZeroAtOriginPositiveElsewhereOnGrid) {
  const PDLyapunovNet net = make_net(7, {2, 64, 64, 64});
  EXPECT_EQ(net.value({0.0, 0.0}), 0.0);
  const GridField f = evaluate_on_grid(net, GridDomain{});
  for (double v : f.values) EXPECT_GT(v, 0.0);
}

TEST(NetTest, GradientVanishesExactlyAtOrigin) {
  for (std::uint64_t seed : {1u, 2u, 3u}) {
    const PDLyapunovNet net = make_net(seed, {2, 64, 64, 64});
    const Eigen::Vector2d g = net.grad_x({0.0, 0.0});
    EXPECT_EQ(g(0), 0.0);
    EXPECT_EQ(g(1), 0.0);
  }
}

TEST(NetTest, BatchedMatchesPointwise) {
  const PDLyapunovNet net = make_net(4);
  Eigen::Matrix2Xd xs(2, 3);
  xs << 0.1, -0.5, 1.2, 2.0, 0.3, -4.0;
  const Eigen::VectorXd v = net.values(xs);
  const Eigen::Matrix2Xd g = net.grads_x(xs);
  for (int j = 0; j < 3; ++j) {
    const StateVec x = StateVec::from(xs.col(j));
    EXPECT_NEAR(v(j), net.value(x), 1e-14);
    EXPECT_LT((g.col(j) - net.grad_x(x)).norm(), 1e-13);
  }
}

TEST(NetTest, InputGradientMatchesFiniteDifferences) {
  const PDLyapunovNet net = make_net(5, {2, 64, 64, 64});
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> th(-1.5, 1.5), om(-6.0, 6.0);
  for (int i = 0; i < 50; ++i) {
    const StateVec x{th(rng), om(rng)};
    const auto fn = [&net](const Eigen::VectorXd& v) { return net.value(StateVec::from(v)); };
    const Eigen::VectorXd fd = test::fd_gradient(fn, x.vec(), 1e-5);
    EXPECT_LT(test::rel_error(net.grad_x(x), fd), 1e-4);
  }
}

TEST(NetTest, ParameterGradientMatchesFiniteDifferences) {
  const PDLyapunovNet net = make_net(6, {2, 8, 8, 8});
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> th(-1.5, 1.5), om(-6.0, 6.0);
  const Eigen::VectorXd theta = net.flat_params();
  for (int i = 0; i < 20; ++i) {
    const StateVec x{th(rng), om(rng)};
    const auto fn = [&](const Eigen::VectorXd& p) {
      PDLyapunovNet n = net;
      n.set_flat_params(p);
      return n.value(x);
    };
    const Eigen::VectorXd fd = test::fd_gradient(fn, theta);
    const Eigen::VectorXd an = PDLyapunovNet::flatten(net.grad_params(x));
    EXPECT_LT(test::rel_error(an, fd), 1e-4);
  }
}

TEST(NetTest, BackwardWeightsColumns) {
  const PDLyapunovNet net = make_net(10);
  Eigen::Matrix2Xd xs(2, 2);
  xs << 0.3, -0.2, 1.0, 0.5;
  Eigen::VectorXd dv(2);
  dv << 2.0, -3.0;
  Eigen::Matrix2Xd dx;
  const ParamGrad g = net.backward(net.forward(xs), dv, &dx);
  const Eigen::VectorXd expect = 2.0 * PDLyapunovNet::flatten(net.grad_params(StateVec::from(xs.col(0)))) -
                                 3.0 * PDLyapunovNet::flatten(net.grad_params(StateVec::from(xs.col(1))));
  EXPECT_LT((PDLyapunovNet::flatten(g) - expect).norm(), 1e-12 * std::max(1.0, expect.norm()));
  EXPECT_LT((dx.col(1) + 3.0 * net.grad_x(StateVec::from(xs.col(1)))).norm(), 1e-12);
}

TEST(NetTest, SgdStepMovesAlongNegativeGradient) {
  PDLyapunovNet net = make_net(12);
  const StateVec x{0.5, 1.0};
  const double before = net.value(x);
  net.sgd_step(net.grad_params(x), 1e-4);
  EXPECT_LT(net.value(x), before);
}

TEST(CheckpointTest, RoundTripIsBitExact) {
  const PDLyapunovNet net = make_net(13, {2, 64, 64, 64});
  std::stringstream ss;
  net.save(ss);
  const PDLyapunovNet back = PDLyapunovNet::load(ss);
  EXPECT_EQ(back.flat_params(), net.flat_params());
  EXPECT_EQ(back.value({0.3, -0.4}), net.value({0.3, -0.4}));
  std::stringstream again;
  back.save(again);
  EXPECT_EQ(again.str(), [&] {
    std::stringstream s;
    net.save(s);
    return s.str();
  }());
}

TEST(CheckpointTest, RejectsCorruptInput) {
  std::stringstream bad_magic("not-a-checkpoint 1\n");
  EXPECT_THROW(PDLyapunovNet::load(bad_magic), std::runtime_error);
  const PDLyapunovNet net = make_net(14, {2, 4});
  std::stringstream ss;
  net.save(ss);
  std::string text = ss.str();
  std::stringstream truncated(text.substr(0, text.size() / 2));
  EXPECT_THROW(PDLyapunovNet::load(truncated), std::runtime_error);
}

TEST(PretrainTest, ZeroStepsLeavesNetUnchanged) {
  const PDLyapunovNet net = make_net(15);
  PretrainOptions o;
  o.steps = 0;
  std::mt19937_64 rng(0);
  const PretrainResult r = pretrain_quadratic(net, GridDomain{}, o, rng);
  EXPECT_EQ(r.net.flat_params(), net.flat_params());
  EXPECT_EQ(r.initial_mse, r.final_mse);
}

TEST(PretrainTest, SameSeedIsBitIdentical) {
  PretrainOptions o;
  o.steps = 300;
  std::mt19937_64 r1(5), r2(5);
  const PretrainResult a = pretrain_quadratic(make_net(16), GridDomain{}, o, r1);
  const PretrainResult b = pretrain_quadratic(make_net(16), GridDomain{}, o, r2);
  EXPECT_EQ(a.net.flat_params(), b.net.flat_params());
}

TEST(PretrainTest, FitsTheQuadraticTarget) {
  std::mt19937_64 rng(0);
  const PDLyapunovNet init = PDLyapunovNet::random(rng);
  const GridDomain grid;
  const PretrainResult r = pretrain_quadratic(init, grid, PretrainOptions{}, rng);
  EXPECT_NEAR(r.initial_mse, quadratic_mse(init, grid), 1e-12);
  EXPECT_NEAR(r.final_mse, quadratic_mse(r.net, grid), 1e-12);
  EXPECT_LE(r.final_mse, 0.1 * r.initial_mse);

  // Pearson correlation between V and 0.1 theta^2 + 0.1 omega^2 over the grid.
  const GridField v = evaluate_on_grid(r.net, grid);
  Eigen::VectorXd a(grid.size()), b(grid.size());
  for (int i = 0; i < grid.size(); ++i) {
    const StateVec x = grid.cell_center(i);
    a(i) = v.values[static_cast<std::size_t>(i)];
    b(i) = 0.1 * x.theta * x.theta + 0.1 * x.omega * x.omega;
  }
  const Eigen::ArrayXd da = a.array() - a.mean();
  const Eigen::ArrayXd db = b.array() - b.mean();
  const double corr = (da * db).sum() / std::sqrt((da * da).sum() * (db * db).sum());
  EXPECT_GT(corr, 0.95);
}

TEST(PretrainTest, RejectsBadLearningRate) {
  PretrainOptions o;
  o.lr = 0.0;
  std::mt19937_64 rng(0);
  EXPECT_THROW(pretrain_quadratic(make_net(1), GridDomain{}, o, rng), std::invalid_argument);
}

TEST(QuadraticTest, ValueAndGradient) {
  Eigen::Matrix2d p;
  p << 2.0, 0.5, 0.5, 1.0;
  const QuadraticLyapunov v(p);
  EXPECT_DOUBLE_EQ(v.value({1.0, 2.0}), 2.0 + 2.0 + 4.0);
  EXPECT_LT((v.grad_x({1.0, 2.0}) - Eigen::Vector2d(6.0, 5.0)).norm(), 1e-15);
}

}  // namespace
}  // namespace roa
