#include "ioc/options.hpp"

#include <algorithm>

namespace ioc {

OptionParams make_option(std::size_t dimension, int num_actions, double temperature, double nu_init,
                         double z_init) {
  const auto dim = static_cast<Eigen::Index>(dimension);
  OptionParams opt;
  opt.intra_policy.weights = Eigen::MatrixXd::Zero(num_actions, dim);
  opt.intra_policy.temperature = temperature;
  opt.termination.weights = Eigen::VectorXd::Constant(dim, nu_init);
  opt.interest.weights = Eigen::VectorXd::Constant(dim, z_init);
  return opt;
}

std::string to_string(PolicyKind kind) {
  return kind == PolicyKind::kFixedUniform ? "fixed_uniform" : "learned_softmax";
}

PolicyKind parse_policy_kind(std::string_view name) {
  if (name == "fixed_uniform" || name == "uniform") return PolicyKind::kFixedUniform;
  if (name == "learned_softmax" || name == "softmax") return PolicyKind::kLearnedSoftmax;
  throw std::invalid_argument("unknown policy over options '" + std::string(name) + "'");
}

PolicyOverOptions PolicyOverOptions::fixed_uniform(int num_options) {
  if (num_options < 1) throw std::invalid_argument("need at least one option");
  PolicyOverOptions p;
  p.kind_ = PolicyKind::kFixedUniform;
  p.num_options_ = num_options;
  return p;
}

PolicyOverOptions PolicyOverOptions::learned_softmax(int num_options, std::size_t dimension, double temperature) {
  if (num_options < 1) throw std::invalid_argument("need at least one option");
  PolicyOverOptions p;
  p.kind_ = PolicyKind::kLearnedSoftmax;
  p.num_options_ = num_options;
  p.head_.weights = Eigen::MatrixXd::Zero(num_options, static_cast<Eigen::Index>(dimension));
  p.head_.temperature = temperature;
  return p;
}

Eigen::VectorXd PolicyOverOptions::probs(const Eigen::VectorXd& phi) const {
  if (kind_ == PolicyKind::kFixedUniform) {
    return Eigen::VectorXd::Constant(num_options_, 1.0 / num_options_);
  }
  return softmax_probs(head_, phi);
}

SoftmaxHead& PolicyOverOptions::head() {
  if (kind_ != PolicyKind::kLearnedSoftmax) throw std::logic_error("policy over options not learnable");
  return head_;
}

const SoftmaxHead& PolicyOverOptions::head() const {
  if (kind_ != PolicyKind::kLearnedSoftmax) throw std::logic_error("policy over options not learnable");
  return head_;
}

InterestPolicyEval combine_interest(const Eigen::VectorXd& interests, const Eigen::VectorXd& base_probs) {
  InterestPolicyEval eval;
  eval.interests = interests;
  eval.base_probs = base_probs;
  const Eigen::VectorXd weighted = interests.cwiseProduct(base_probs);
  const double total = weighted.sum();
  if (!(total > 0.0)) throw NoInitiableOption();
  // Equal interests cancel; skip the division so the reduction to pi_Omega
  // holds bit for bit.
  if (interests.size() > 0 && (interests.array() == interests[0]).all()) {
    eval.probs = base_probs;
  } else {
    eval.probs = weighted / total;
  }
  return eval;
}

InterestPolicyEval interest_policy(std::span<const OptionParams> options, const PolicyOverOptions& policy,
                                   const Eigen::VectorXd& phi) {
  Eigen::VectorXd interests(static_cast<Eigen::Index>(options.size()));
  for (std::size_t w = 0; w < options.size(); ++w) {
    interests[static_cast<Eigen::Index>(w)] = interest_value(options[w], phi);
  }
  return combine_interest(interests, policy.probs(phi));
}

std::vector<int> available_options(const InterestPolicyEval& eval, double k) {
  std::vector<int> out;
  for (Eigen::Index w = 0; w < eval.interests.size(); ++w) {
    if (eval.interests[w] >= k) out.push_back(static_cast<int>(w));
  }
  if (out.empty()) {
    Eigen::Index best = 0;
    eval.interests.maxCoeff(&best);
    out.push_back(static_cast<int>(best));
  }
  return out;
}

InterestPolicyEval restrict_to(const InterestPolicyEval& eval, std::span<const int> available) {
  if (static_cast<Eigen::Index>(available.size()) == eval.probs.size()) return eval;
  InterestPolicyEval out = eval;
  out.probs.setZero();
  for (int w : available) out.probs[w] = eval.probs[w];
  const double total = out.probs.sum();
  if (total > 0.0) {
    out.probs /= total;
  } else {
    // Underflowed products; fall back to uniform over the available set.
    for (int w : available) out.probs[w] = 1.0 / static_cast<double>(available.size());
  }
  return out;
}

int sample_option(const InterestPolicyEval& eval, double k, Rng& rng) {
  if (k <= 0.0) return sample_categorical(eval.probs, rng);
  const std::vector<int> avail = available_options(eval, k);
  return sample_categorical(restrict_to(eval, avail).probs, rng);
}

std::vector<Eigen::VectorXd> interest_policy_grad_z(const InterestPolicyEval& eval, const Eigen::VectorXd& phi,
                                                    int target) {
  const Eigen::Index n = eval.probs.size();
  if (target < 0 || target >= n) throw std::out_of_range("option index out of range");
  std::vector<Eigen::VectorXd> grads;
  grads.reserve(static_cast<std::size_t>(n));
  const double p_target = eval.probs[target];
  for (Eigen::Index j = 0; j < n; ++j) {
    const double indicator = j == target ? 1.0 : 0.0;
    const double coeff = p_target * (indicator - eval.probs[j]) * (1.0 - eval.interests[j]);
    grads.emplace_back(coeff * phi);
  }
  return grads;
}

std::vector<Eigen::VectorXd> interest_policy_grad_z(std::span<const OptionParams> options,
                                                    const PolicyOverOptions& policy, const Eigen::VectorXd& phi,
                                                    int target) {
  return interest_policy_grad_z(interest_policy(options, policy, phi), phi, target);
}

Eigen::MatrixXd policy_over_options_grad(const InterestPolicyEval& eval, const PolicyOverOptions& policy,
                                         const Eigen::VectorXd& phi, int target) {
  const SoftmaxHead& head = policy.head();
  if (target < 0 || target >= eval.probs.size()) throw std::out_of_range("option index out of range");
  Eigen::VectorXd coeff = -eval.probs;
  coeff[target] += 1.0;
  coeff *= eval.probs[target] / head.temperature;
  return coeff * phi.transpose();
}

Eigen::MatrixXd policy_over_options_grad(const PolicyOverOptions& policy, std::span<const OptionParams> options,
                                         const Eigen::VectorXd& phi, int target) {
  policy.head();  // fixed_uniform has nothing to differentiate
  return policy_over_options_grad(interest_policy(options, policy, phi), policy, phi, target);
}

}  // namespace ioc
