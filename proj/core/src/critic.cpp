#include "ioc/critic.hpp"

#include <cmath>
#include <limits>

namespace ioc {

QUTable::QUTable(int num_options, int num_actions, std::size_t dimension, double gamma)
    : num_actions_(num_actions), dimension_(dimension), gamma_(gamma) {
  if (num_options < 1 || num_actions < 1 || dimension == 0) throw std::invalid_argument("empty critic");
  if (!(gamma >= 0.0 && gamma < 1.0)) throw std::invalid_argument("gamma must lie in [0, 1)");
  weights_.assign(static_cast<std::size_t>(num_options),
                  Eigen::MatrixXd::Zero(num_actions, static_cast<Eigen::Index>(dimension)));
}

double QUTable::value(const Eigen::VectorXd& phi, int option, int action) const {
  return weights(option).row(action).dot(phi);
}

Eigen::VectorXd QUTable::action_values(const Eigen::VectorXd& phi, int option) const {
  return weights(option) * phi;
}

void QUTable::update(const Eigen::VectorXd& phi, int option, int action, double delta, double alpha) {
  if (!std::isfinite(delta)) throw DivergenceError("diverged critic");
  weights(option).row(action) += (alpha * delta) * phi.transpose();
}

bool QUTable::operator==(const QUTable& other) const {
  return gamma_ == other.gamma_ && num_actions_ == other.num_actions_ && weights_ == other.weights_;
}

double q_omega(const QUTable& qu, const OptionParams& opt, int option, const Eigen::VectorXd& phi) {
  return intra_action_probs(opt, phi).dot(qu.action_values(phi, option));
}

Eigen::VectorXd q_omega_all(const QUTable& qu, std::span<const OptionParams> options, const Eigen::VectorXd& phi) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(options.size()));
  for (std::size_t w = 0; w < options.size(); ++w) {
    out[static_cast<Eigen::Index>(w)] = q_omega(qu, options[w], static_cast<int>(w), phi);
  }
  return out;
}

double v_omega(const Eigen::VectorXd& q_omega_values, const InterestPolicyEval& eval) {
  return eval.probs.dot(q_omega_values);
}

double v_omega(const QUTable& qu, std::span<const OptionParams> options, const InterestPolicyEval& eval,
               const Eigen::VectorXd& phi) {
  return v_omega(q_omega_all(qu, options, phi), eval);
}

double td_target(double gamma, const TdInputs& in) {
  if (in.terminal) return in.reward;
  double best = -std::numeric_limits<double>::infinity();
  if (in.max_over.empty()) {
    best = in.q_omega_next.maxCoeff();
  } else {
    for (int w : in.max_over) best = std::max(best, in.q_omega_next[w]);
  }
  const double cont = (1.0 - in.beta_next) * in.q_omega_next[in.option] + in.beta_next * best;
  return in.reward + gamma * cont;
}

double td_error(const QUTable& qu, const Eigen::VectorXd& phi, const TdInputs& in) {
  return td_target(qu.gamma(), in) - qu.value(phi, in.option, in.action);
}

double td_error(const QUTable& qu, std::span<const OptionParams> options, const Eigen::VectorXd& phi,
                const Eigen::VectorXd& phi_next, double reward, bool terminal, int option, int action,
                std::span<const int> max_over) {
  TdInputs in;
  in.reward = reward;
  in.terminal = terminal;
  in.option = option;
  in.action = action;
  in.beta_next = termination_prob(options[static_cast<std::size_t>(option)], phi_next);
  in.q_omega_next = q_omega_all(qu, options, phi_next);
  in.max_over = max_over;
  return td_error(qu, phi, in);
}

}  // namespace ioc
