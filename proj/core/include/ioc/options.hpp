#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ioc/funcapprox.hpp"
#include "ioc/random.hpp"

namespace ioc {

/// One option: intra-option policy, termination and interest, all linear in
/// the same features.
struct OptionParams {
  SoftmaxHead intra_policy;  // theta
  SigmoidHead termination;   // nu
  SigmoidHead interest;      // z

  std::size_t dimension() const { return static_cast<std::size_t>(termination.weights.size()); }
};

/// Zero-initialized option: uniform intra-policy, interest 0.5 everywhere,
/// termination sigma(nu_init) everywhere (constant features assumed).
OptionParams make_option(std::size_t dimension, int num_actions, double temperature, double nu_init,
                         double z_init = 0.0);

enum class PolicyKind { kFixedUniform, kLearnedSoftmax };

std::string to_string(PolicyKind kind);
PolicyKind parse_policy_kind(std::string_view name);

class PolicyOverOptions {
 public:
  static PolicyOverOptions fixed_uniform(int num_options);
  static PolicyOverOptions learned_softmax(int num_options, std::size_t dimension, double temperature = 1.0);

  PolicyKind kind() const { return kind_; }
  int num_options() const { return num_options_; }
  Eigen::VectorXd probs(const Eigen::VectorXd& phi) const;

  /// Throws for fixed_uniform.
  SoftmaxHead& head();
  const SoftmaxHead& head() const;

 private:
  PolicyKind kind_ = PolicyKind::kFixedUniform;
  int num_options_ = 0;
  SoftmaxHead head_;
};

/// pi_I(w|s) = I_w(s) pi_Omega(w|s) / sum_w' I_w'(s) pi_Omega(w'|s).
struct InterestPolicyEval {
  Eigen::VectorXd probs;
  Eigen::VectorXd interests;
  Eigen::VectorXd base_probs;
};

class NoInitiableOption : public std::runtime_error {
 public:
  NoInitiableOption() : std::runtime_error("no initiable option") {}
};

/// Normalizes interest-weighted base probabilities. Throws NoInitiableOption
/// when every product is zero.
InterestPolicyEval combine_interest(const Eigen::VectorXd& interests, const Eigen::VectorXd& base_probs);

InterestPolicyEval interest_policy(std::span<const OptionParams> options, const PolicyOverOptions& policy,
                                   const Eigen::VectorXd& phi);

/// Options whose interest is at least k; the argmax-interest option if none is.
std::vector<int> available_options(const InterestPolicyEval& eval, double k);

/// Zeroes the probability of options outside `available` and renormalizes.
InterestPolicyEval restrict_to(const InterestPolicyEval& eval, std::span<const int> available);

/// Samples from probs restricted to available_options(eval, k).
int sample_option(const InterestPolicyEval& eval, double k, Rng& rng);

/// d pi_I(target|s) / d z_j for every option j, under the (possibly
/// restricted) distribution in `eval`:
///   pi_I(target) * (1[j == target] - pi_I(j)) * (1 - I_j(s)) * phi.
std::vector<Eigen::VectorXd> interest_policy_grad_z(const InterestPolicyEval& eval, const Eigen::VectorXd& phi,
                                                    int target);
std::vector<Eigen::VectorXd> interest_policy_grad_z(std::span<const OptionParams> options,
                                                    const PolicyOverOptions& policy, const Eigen::VectorXd& phi,
                                                    int target);

/// d pi_I(target|s) / d W for the learned softmax policy over options:
/// row m is pi_I(target) * (1[m == target] - pi_I(m)) / temperature * phi.
Eigen::MatrixXd policy_over_options_grad(const InterestPolicyEval& eval, const PolicyOverOptions& policy,
                                         const Eigen::VectorXd& phi, int target);
Eigen::MatrixXd policy_over_options_grad(const PolicyOverOptions& policy, std::span<const OptionParams> options,
                                         const Eigen::VectorXd& phi, int target);

inline double termination_prob(const OptionParams& opt, const Eigen::VectorXd& phi) {
  return sigmoid_value(opt.termination, phi);
}

inline Eigen::VectorXd intra_action_probs(const OptionParams& opt, const Eigen::VectorXd& phi) {
  return softmax_probs(opt.intra_policy, phi);
}

inline double interest_value(const OptionParams& opt, const Eigen::VectorXd& phi) {
  return sigmoid_value(opt.interest, phi);
}

}  // namespace ioc
