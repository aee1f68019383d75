#pragma once

#include <cstddef>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "ioc/env.hpp"

namespace ioc {

enum class FeatureKind { kOneHot, kRbfGrid };

/// Maps an environment state to the feature vector every linear head reads.
/// One-hot over grid state indices, or Gaussian bumps on a lattice of
/// centres for continuous positions.
class FeatureMap {
 public:
  static FeatureMap one_hot(std::size_t num_states);
  /// nx * ny centres spread evenly over `bounds` (inclusive of the edges);
  /// the bandwidth defaults to the larger lattice spacing.
  static FeatureMap rbf_grid(const Rect& bounds, int nx, int ny, double bandwidth = 0.0);

  FeatureKind kind() const { return kind_; }
  std::size_t dimension() const { return dimension_; }
  const std::vector<Vec2>& centers() const { return centers_; }
  double bandwidth() const { return bandwidth_; }
  int nx() const { return nx_; }
  int ny() const { return ny_; }
  const Rect& bounds() const { return bounds_; }

  Eigen::VectorXd operator()(const EnvState& state) const;

  /// Typical feature sum: 1 for one-hot, the sum at the centre of the
  /// bounds for rbf. Constant weights c / mass give w . phi close to c.
  double reference_mass() const;

 private:
  FeatureKind kind_ = FeatureKind::kOneHot;
  std::size_t dimension_ = 0;
  std::vector<Vec2> centers_;
  double bandwidth_ = 1.0;
  int nx_ = 0;
  int ny_ = 0;
  Rect bounds_;
};

inline Eigen::VectorXd features(const FeatureMap& map, const EnvState& state) { return map(state); }

/// Numerically safe logistic function.
double logistic(double x);

/// sigma(w . phi): termination and interest functions.
struct SigmoidHead {
  Eigen::VectorXd weights;
};

double sigmoid_value(const SigmoidHead& head, const Eigen::VectorXd& phi);
/// d sigma(w . phi) / dw = sigma (1 - sigma) phi.
Eigen::VectorXd sigmoid_grad(const SigmoidHead& head, const Eigen::VectorXd& phi);

/// Boltzmann distribution over `weights.rows()` choices with logits
/// (W phi) / temperature.
struct SoftmaxHead {
  Eigen::MatrixXd weights;
  double temperature = 1.0;

  Eigen::Index num_choices() const { return weights.rows(); }
};

Eigen::VectorXd softmax(const Eigen::VectorXd& logits);
Eigen::VectorXd softmax_probs(const SoftmaxHead& head, const Eigen::VectorXd& phi);
/// Gradient of log p_choice w.r.t. the weight matrix. Row i is
/// ((i == choice) - p_i) / temperature * phi.
Eigen::MatrixXd softmax_loggrad(const SoftmaxHead& head, const Eigen::VectorXd& phi, int choice);

}  // namespace ioc
