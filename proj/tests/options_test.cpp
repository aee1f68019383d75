#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ioc/options.hpp"
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

std::vector<OptionParams> random_options(Rng& rng, int n, Eigen::Index dim) {
  std::vector<OptionParams> opts;
  for (int i = 0; i < n; ++i) {
    OptionParams o = make_option(static_cast<std::size_t>(dim), 3, 1.0, 0.0);
    o.interest.weights = uniform_vector(rng, dim, -1, 1);
    o.termination.weights = uniform_vector(rng, dim, -1, 1);
    opts.push_back(o);
  }
  return opts;
}

InterestPolicyEval combine(std::initializer_list<double> interests, std::initializer_list<double> base) {
  return combine_interest(Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(interests.begin(), interests.size())),
                          Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(base.begin(), base.size())));
}

TEST(MakeOption, Initialization) {
  const OptionParams o = make_option(6, 4, 1.0, -4.6);
  const Eigen::VectorXd phi = Eigen::VectorXd::Unit(6, 2);
  EXPECT_NEAR(termination_prob(o, phi), 0.0099, 1e-4);
  EXPECT_DOUBLE_EQ(interest_value(o, phi), 0.5);
  EXPECT_TRUE(intra_action_probs(o, phi).isApprox(Eigen::VectorXd::Constant(4, 0.25)));
  EXPECT_DOUBLE_EQ(termination_prob(make_option(6, 4, 1.0, 0.0), phi), 0.5);
}

TEST(CombineInterest, Examples) {
  EXPECT_TRUE(combine({0.5, 0.5}, {0.5, 0.5}).probs.isApprox(Eigen::Vector2d(0.5, 0.5)));
  EXPECT_TRUE(combine({1.0, 0.0}, {0.5, 0.5}).probs.isApprox(Eigen::Vector2d(1.0, 0.0)));
  const Eigen::VectorXd p = combine({0.2, 0.6}, {0.5, 0.5}).probs;
  EXPECT_NEAR(p[0], 0.25, 1e-15);
  EXPECT_NEAR(p[1], 0.75, 1e-15);
  EXPECT_THROW(combine({0.0, 0.0}, {0.5, 0.5}), NoInitiableOption);
}

TEST(CombineInterest, Properties) {
  Rng rng(3);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Index n = 1 + static_cast<Eigen::Index>(uniform_index(rng, 7));
    Eigen::VectorXd interests = uniform_vector(rng, n, 0, 1);
    Eigen::VectorXd base = uniform_vector(rng, n, 0.01, 1);
    base /= base.sum();
    ASSERT_NEAR(combine_interest(interests, base).probs.sum(), 1.0, 1e-12);

    // Scaling every interest by a constant leaves pi_I untouched.
    const Eigen::VectorXd constant = Eigen::VectorXd::Constant(n, 0.05 + uniform01(rng));
    ASSERT_TRUE(combine_interest(constant, base).probs == base);

    // Zero interest never gets probability mass.
    const Eigen::Index dead = static_cast<Eigen::Index>(uniform_index(rng, static_cast<std::size_t>(n)));
    interests[dead] = 0.0;
    if (interests.sum() > 0.0) {
      ASSERT_EQ(combine_interest(interests, base).probs[dead], 0.0);
    }
  }
}

TEST(PolicyOverOptions, Kinds) {
  PolicyOverOptions fixed = PolicyOverOptions::fixed_uniform(4);
  EXPECT_TRUE(fixed.probs(Eigen::VectorXd::Ones(3)).isApprox(Eigen::VectorXd::Constant(4, 0.25)));
  EXPECT_THROW(fixed.head(), std::logic_error);

  PolicyOverOptions learned = PolicyOverOptions::learned_softmax(3, 5);
  EXPECT_TRUE(learned.probs(Eigen::VectorXd::Ones(5)).isApprox(Eigen::VectorXd::Constant(3, 1.0 / 3)));
  learned.head().weights(1, 0) = 2.0;
  EXPECT_GT(learned.probs(Eigen::VectorXd::Unit(5, 0))[1], 0.5);
  EXPECT_EQ(parse_policy_kind(to_string(PolicyKind::kLearnedSoftmax)), PolicyKind::kLearnedSoftmax);
}

TEST(AvailableOptions, Threshold) {
  EXPECT_EQ(available_options(combine({0.9, 0.2}, {0.5, 0.5}), 0.0), (std::vector<int>{0, 1}));
  EXPECT_EQ(available_options(combine({0.9, 0.2}, {0.5, 0.5}), 0.5), (std::vector<int>{0}));
  EXPECT_EQ(available_options(combine({0.3, 0.2}, {0.5, 0.5}), 0.95), (std::vector<int>{0}));
  EXPECT_EQ(available_options(combine({0.3, 0.4, 0.8}, {0.2, 0.3, 0.5}), 0.35), (std::vector<int>{1, 2}));
}

TEST(RestrictTo, Renormalizes) {
  const InterestPolicyEval e = combine({0.5, 0.5, 0.5}, {0.2, 0.3, 0.5});
  const std::vector<int> keep{1, 2};
  const Eigen::VectorXd p = restrict_to(e, keep).probs;
  EXPECT_EQ(p[0], 0.0);
  EXPECT_NEAR(p[1], 0.375, 1e-15);
  EXPECT_NEAR(p[2], 0.625, 1e-15);
}

TEST(SampleOption, Degenerate) {
  Rng rng(1);
  const InterestPolicyEval e = combine({1.0, 0.0}, {0.5, 0.5});
  const InterestPolicyEval k = combine({0.9, 0.2, 0.1}, {0.2, 0.3, 0.5});
  for (int i = 0; i < 1000; ++i) {
    ASSERT_EQ(sample_option(e, 0.0, rng), 0);
    ASSERT_EQ(sample_option(k, 0.5, rng), 0);
  }
}

TEST(SampleOption, MatchesDistribution) {
  Rng rng(4);
  const InterestPolicyEval e = combine({0.2, 0.6, 1.0}, {0.5, 0.25, 0.25});
  std::vector<int> counts(3, 0);
  const int n = 100000;
  for (int i = 0; i < n; ++i) ++counts[static_cast<std::size_t>(sample_option(e, 0.0, rng))];
  for (int j = 0; j < 3; ++j) {
    const double p = e.probs[j];
    EXPECT_NEAR(counts[static_cast<std::size_t>(j)] / double(n), p, 5 * std::sqrt(p * (1 - p) / n));
  }
}

TEST(InterestGradZ, SignsAtZero) {
  std::vector<OptionParams> opts{make_option(3, 2, 1.0, 0.0), make_option(3, 2, 1.0, 0.0)};
  const PolicyOverOptions uniform = PolicyOverOptions::fixed_uniform(2);
  const Eigen::VectorXd phi = Eigen::Vector3d{0.5, -1.0, 0.3};
  const auto g = interest_policy_grad_z(opts, uniform, phi, 1);
  EXPECT_GT(g[1].dot(phi), 0.0);
  EXPECT_LT(g[0].dot(phi), 0.0);
  // pi_I (1 - pi_I) (1 - I) = 0.5 * 0.5 * 0.5
  EXPECT_TRUE(g[1].isApprox(0.125 * phi));
}

TEST(InterestGradZ, SingleOptionIsZero) {
  Rng rng(2);
  std::vector<OptionParams> opts = random_options(rng, 1, 4);
  const auto g = interest_policy_grad_z(opts, PolicyOverOptions::fixed_uniform(1), feature_vector(rng, 4), 0);
  ASSERT_EQ(g.size(), 1u);
  EXPECT_TRUE(g[0].isZero(0.0));
}

TEST(InterestGradZ, MatchesFiniteDifferences) {
  Rng rng(21);
  for (int i = 0; i < 1000; ++i) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 4));
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(uniform_index(rng, 5));
    std::vector<OptionParams> opts = random_options(rng, n, dim);
    PolicyOverOptions policy = PolicyOverOptions::learned_softmax(n, static_cast<std::size_t>(dim));
    policy.head().weights = uniform_matrix(rng, n, dim, -1, 1);
    const Eigen::VectorXd phi = feature_vector(rng, dim);
    const int target = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    const auto analytic = interest_policy_grad_z(opts, policy, phi, target);
    for (int j = 0; j < n; ++j) {
      const auto f = [&](const Eigen::VectorXd& z) {
        std::vector<OptionParams> moved = opts;
        moved[static_cast<std::size_t>(j)].interest.weights = z;
        return interest_policy(moved, policy, phi).probs[target];
      };
      const auto fd = central_difference(f, opts[static_cast<std::size_t>(j)].interest.weights);
      ASSERT_LE(rel_error(analytic[static_cast<std::size_t>(j)], fd), 1e-5) << "instance " << i << " option " << j;
    }
  }
}

TEST(PolicyOverOptionsGrad, EqualInterestsMatchSoftmaxForm) {
  Rng rng(6);
  for (int i = 0; i < 200; ++i) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 4));
    std::vector<OptionParams> opts;
    for (int j = 0; j < n; ++j) opts.push_back(make_option(3, 2, 1.0, 0.0));
    PolicyOverOptions policy = PolicyOverOptions::learned_softmax(n, 3, 0.7);
    policy.head().weights = uniform_matrix(rng, n, 3, -1, 1);
    const Eigen::VectorXd phi = feature_vector(rng, 3);
    const int target = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    // d pi / dW = pi * d log pi / dW when interests cancel.
    const Eigen::MatrixXd expected =
        policy.probs(phi)[target] * softmax_loggrad(policy.head(), phi, target);
    ASSERT_LE((policy_over_options_grad(policy, opts, phi, target) - expected).cwiseAbs().maxCoeff(), 1e-14);
  }
}

TEST(PolicyOverOptionsGrad, SingleOptionIsZero) {
  std::vector<OptionParams> opts{make_option(3, 2, 1.0, 0.0)};
  const PolicyOverOptions policy = PolicyOverOptions::learned_softmax(1, 3);
  EXPECT_TRUE(policy_over_options_grad(policy, opts, Eigen::Vector3d{1, 2, 3}, 0).isZero(0.0));
}

TEST(PolicyOverOptionsGrad, MatchesFiniteDifferences) {
  Rng rng(22);
  for (int i = 0; i < 1000; ++i) {
    const int n = 2 + static_cast<int>(uniform_index(rng, 4));
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(uniform_index(rng, 5));
    std::vector<OptionParams> opts = random_options(rng, n, dim);
    PolicyOverOptions policy = PolicyOverOptions::learned_softmax(n, static_cast<std::size_t>(dim),
                                                                  0.5 + 1.5 * uniform01(rng));
    policy.head().weights = uniform_matrix(rng, n, dim, -1, 1);
    const Eigen::VectorXd phi = feature_vector(rng, dim);
    const int target = static_cast<int>(uniform_index(rng, static_cast<std::size_t>(n)));
    const auto f = [&](const Eigen::VectorXd& w) {
      PolicyOverOptions moved = policy;
      moved.head().weights = shaped(w, n, dim);
      return interest_policy(opts, moved, phi).probs[target];
    };
    const auto fd = central_difference(f, flat(policy.head().weights));
    ASSERT_LE(rel_error(flat(policy_over_options_grad(policy, opts, phi, target)), fd), 1e-5) << "instance " << i;
  }
}

}  // namespace
}  // namespace ioc
