#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "ioc/options.hpp"

namespace ioc {

class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Q_U(s, w, a) = W[w](a, :) . phi(s). With one-hot features this is exactly
/// a (state x option x action) table.
class QUTable {
 public:
  QUTable() = default;
  QUTable(int num_options, int num_actions, std::size_t dimension, double gamma);

  int num_options() const { return static_cast<int>(weights_.size()); }
  int num_actions() const { return num_actions_; }
  std::size_t dimension() const { return dimension_; }
  double gamma() const { return gamma_; }

  double value(const Eigen::VectorXd& phi, int option, int action) const;
  /// Q_U(s, w, .) for every action.
  Eigen::VectorXd action_values(const Eigen::VectorXd& phi, int option) const;

  /// Q_U(s, w, a) += alpha * delta (weights += alpha * delta * phi).
  /// Throws DivergenceError("diverged critic") on a non-finite delta.
  void update(const Eigen::VectorXd& phi, int option, int action, double delta, double alpha);

  Eigen::MatrixXd& weights(int option) { return weights_.at(static_cast<std::size_t>(option)); }
  const Eigen::MatrixXd& weights(int option) const { return weights_.at(static_cast<std::size_t>(option)); }

  bool operator==(const QUTable& other) const;

 private:
  std::vector<Eigen::MatrixXd> weights_;  // per option: actions x dimension
  int num_actions_ = 0;
  std::size_t dimension_ = 0;
  double gamma_ = 0.9;
};

/// Q_Omega(s, w) = sum_a pi_w(a|s) Q_U(s, w, a).
double q_omega(const QUTable& qu, const OptionParams& opt, int option, const Eigen::VectorXd& phi);
Eigen::VectorXd q_omega_all(const QUTable& qu, std::span<const OptionParams> options, const Eigen::VectorXd& phi);

/// V_Omega(s) = sum_w pi_I(w|s) Q_Omega(s, w).
double v_omega(const Eigen::VectorXd& q_omega_values, const InterestPolicyEval& eval);
double v_omega(const QUTable& qu, std::span<const OptionParams> options, const InterestPolicyEval& eval,
               const Eigen::VectorXd& phi);

/// Target of intra-option Q-learning for (s, w, a) -> (r, s'):
///   r + gamma [(1 - beta_w(s')) Q_Omega(s', w) + beta_w(s') max_w' Q_Omega(s', w')]
/// or r alone on terminal transitions. The max ranges over `max_over`
/// when non-empty, else over all options.
struct TdInputs {
  double reward = 0.0;
  bool terminal = false;
  int option = 0;
  int action = 0;
  double beta_next = 0.0;
  /// Q_Omega(s', .) for all options.
  Eigen::VectorXd q_omega_next;
  std::span<const int> max_over;
};

double td_target(double gamma, const TdInputs& in);
/// delta = target - Q_U(s, w, a).
double td_error(const QUTable& qu, const Eigen::VectorXd& phi, const TdInputs& in);

/// Convenience form that evaluates beta and Q_Omega at s' itself.
double td_error(const QUTable& qu, std::span<const OptionParams> options, const Eigen::VectorXd& phi,
                const Eigen::VectorXd& phi_next, double reward, bool terminal, int option, int action,
                std::span<const int> max_over = {});

}  // namespace ioc
