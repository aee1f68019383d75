#include <cmath>

#include <gtest/gtest.h>

#include "ioc/funcapprox.hpp"
#include "test_support.hpp"

namespace ioc {
namespace {

using testing::central_difference;
using testing::feature_vector;
using testing::flat;
using testing::rel_error;
using testing::shaped;
using testing::uniform_matrix;
using testing::uniform_vector;

TEST(FeatureMap, OneHot) {
  const FeatureMap map = FeatureMap::one_hot(104);
  const Eigen::VectorXd phi = map(GridState{{0, 0}, 7});
  ASSERT_EQ(phi.size(), 104);
  EXPECT_DOUBLE_EQ(phi.sum(), 1.0);
  EXPECT_DOUBLE_EQ(phi[7], 1.0);
  EXPECT_EQ((phi.array() != 0.0).count(), 1);
  EXPECT_THROW(map(GridState{{0, 0}, 104}), std::out_of_range);
  EXPECT_THROW(map(MazeState{}), std::invalid_argument);
}

TEST(FeatureMap, RbfGrid) {
  const Rect bounds{{-0.4, -0.2}, {0.4, 0.4}};
  const FeatureMap map = FeatureMap::rbf_grid(bounds, 10, 10);
  ASSERT_EQ(map.dimension(), 100u);
  EXPECT_NEAR(map.bandwidth(), 0.8 / 9.0, 1e-15);

  const Vec2 c = map.centers()[23];
  const Eigen::VectorXd at_center = map(MazeState{c});
  EXPECT_DOUBLE_EQ(at_center[23], 1.0);

  // Equal distance from a centre gives equal activation.
  const Vec2 a = c + Vec2{0.03, 0.04};
  const Vec2 b = c + Vec2{-0.05, 0.0};
  EXPECT_NEAR(map(MazeState{a})[23], map(MazeState{b})[23], 1e-15);

  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Vec2 p{-0.4 + 0.8 * uniform01(rng), -0.2 + 0.6 * uniform01(rng)};
    const Eigen::VectorXd phi = map(MazeState{p});
    ASSERT_GT(phi.minCoeff(), 0.0);
    ASSERT_LE(phi.maxCoeff(), 1.0);
  }
}

TEST(Sigmoid, ClosedForms) {
  const Eigen::VectorXd phi = Eigen::VectorXd::Unit(5, 3);
  EXPECT_DOUBLE_EQ(sigmoid_value(SigmoidHead{Eigen::VectorXd::Zero(5)}, phi), 0.5);
  EXPECT_NEAR(sigmoid_value(SigmoidHead{Eigen::VectorXd::Constant(5, std::log(3.0))}, phi), 0.75, 1e-15);

  double prev = 0.0;
  for (double w = 0.0; w <= 800.0; w += 20.0) {
    const double v = sigmoid_value(SigmoidHead{Eigen::VectorXd::Constant(5, w)}, phi);
    EXPECT_GE(v, prev);
    EXPECT_LE(v, 1.0);
    prev = v;
  }
  EXPECT_DOUBLE_EQ(prev, 1.0);
  EXPECT_GT(sigmoid_value(SigmoidHead{Eigen::VectorXd::Constant(5, -800.0)}, phi), -1e-300);
}

TEST(Sigmoid, GradientClosedForms) {
  const Eigen::VectorXd e3 = Eigen::VectorXd::Unit(5, 3);
  EXPECT_TRUE(sigmoid_grad(SigmoidHead{Eigen::VectorXd::Zero(5)}, e3).isApprox(0.25 * e3));
  Rng rng(1);
  const SigmoidHead head{uniform_vector(rng, 5, -2, 2)};
  EXPECT_TRUE(sigmoid_grad(head, Eigen::VectorXd::Zero(5)).isZero(0.0));
}

TEST(Sigmoid, GradientMatchesFiniteDifferences) {
  Rng rng(11);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(uniform_index(rng, 8));
    const Eigen::VectorXd phi = feature_vector(rng, dim);
    const SigmoidHead head{uniform_vector(rng, dim, -1, 1)};
    const auto fd = central_difference([&](const Eigen::VectorXd& w) { return sigmoid_value(SigmoidHead{w}, phi); },
                                       head.weights);
    ASSERT_LE(rel_error(sigmoid_grad(head, phi), fd), 1e-5) << "instance " << i;
  }
}

TEST(Softmax, ClosedForms) {
  SoftmaxHead zero{Eigen::MatrixXd::Zero(4, 3), 1.0};
  EXPECT_TRUE(softmax_probs(zero, Eigen::VectorXd::Ones(3)).isApprox(Eigen::VectorXd::Constant(4, 0.25)));

  SoftmaxHead two{Eigen::MatrixXd::Zero(2, 1), 1.0};
  two.weights(0, 0) = std::log(2.0);
  const Eigen::VectorXd p = softmax_probs(two, Eigen::VectorXd::Ones(1));
  EXPECT_NEAR(p[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(p[1], 1.0 / 3.0, 1e-15);

  // No overflow at huge logits.
  const Eigen::VectorXd big = softmax(Eigen::Vector3d{1000.0, 999.0, -1000.0});
  EXPECT_TRUE(big.allFinite());
  EXPECT_NEAR(big.sum(), 1.0, 1e-15);
}

TEST(Softmax, NormalizationAndShiftInvariance) {
  Rng rng(5);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_index(rng, 6));
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(uniform_index(rng, 6));
    const SoftmaxHead head{uniform_matrix(rng, n, dim, -5, 5), 0.1 + 2.0 * uniform01(rng)};
    const Eigen::VectorXd phi = uniform_vector(rng, dim, -1, 1);
    const Eigen::VectorXd p = softmax_probs(head, phi);
    ASSERT_NEAR(p.sum(), 1.0, 1e-12);
    ASSERT_GE(p.minCoeff(), 0.0);

    const Eigen::VectorXd logits = (head.weights * phi) / head.temperature;
    const Eigen::VectorXd shifted = softmax(logits.array() + 37.5 * uniform01(rng));
    ASSERT_LE((shifted - softmax(logits)).cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Softmax, LogGradClosedForms) {
  const Eigen::VectorXd phi = Eigen::Vector3d{1.0, -2.0, 0.5};
  const double temperature = 2.0;
  const SoftmaxHead head{Eigen::MatrixXd::Zero(2, 3), temperature};
  const Eigen::MatrixXd g = softmax_loggrad(head, phi, 0);
  EXPECT_TRUE(g.row(0).transpose().isApprox(phi / (2 * temperature)));
  EXPECT_TRUE(g.row(1).transpose().isApprox(-phi / (2 * temperature)));
  EXPECT_THROW(softmax_loggrad(head, phi, 2), std::out_of_range);
}

TEST(Softmax, ScoreFunctionIdentity) {
  Rng rng(8);
  for (int i = 0; i < 200; ++i) {
    const SoftmaxHead head{uniform_matrix(rng, 4, 3, -2, 2), 0.5 + uniform01(rng)};
    const Eigen::VectorXd phi = uniform_vector(rng, 3, -1, 1);
    const Eigen::VectorXd p = softmax_probs(head, phi);
    Eigen::MatrixXd expected = Eigen::MatrixXd::Zero(4, 3);
    for (int c = 0; c < 4; ++c) expected += p[c] * softmax_loggrad(head, phi, c);
    ASSERT_LE(expected.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Softmax, LogGradMatchesFiniteDifferences) {
  Rng rng(13);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Index n = 2 + static_cast<Eigen::Index>(uniform_index(rng, 4));
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(uniform_index(rng, 5));
    const SoftmaxHead head{uniform_matrix(rng, n, dim, -1, 1), 0.5 + 1.5 * uniform01(rng)};
    const Eigen::VectorXd phi = feature_vector(rng, dim);
    const int choice = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    const auto f = [&](const Eigen::VectorXd& w) {
      return std::log(softmax_probs(SoftmaxHead{shaped(w, n, dim), head.temperature}, phi)[choice]);
    };
    ASSERT_LE(rel_error(flat(softmax_loggrad(head, phi, choice)), central_difference(f, flat(head.weights))), 1e-5)
        << "instance " << i;
  }
}

}  // namespace
}  // namespace ioc
