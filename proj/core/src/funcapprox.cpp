#include "ioc/funcapprox.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace ioc {

FeatureMap FeatureMap::one_hot(std::size_t num_states) {
  if (num_states == 0) throw std::invalid_argument("one-hot feature map needs at least one state");
  FeatureMap map;
  map.kind_ = FeatureKind::kOneHot;
  map.dimension_ = num_states;
  return map;
}

FeatureMap FeatureMap::rbf_grid(const Rect& bounds, int nx, int ny, double bandwidth) {
  if (nx < 2 || ny < 2) throw std::invalid_argument("rbf grid needs at least 2 centres per axis");
  FeatureMap map;
  map.kind_ = FeatureKind::kRbfGrid;
  map.nx_ = nx;
  map.ny_ = ny;
  map.bounds_ = bounds;
  const double dx = (bounds.hi.x() - bounds.lo.x()) / (nx - 1);
  const double dy = (bounds.hi.y() - bounds.lo.y()) / (ny - 1);
  map.bandwidth_ = bandwidth > 0.0 ? bandwidth : std::max(dx, dy);
  map.centers_.reserve(static_cast<std::size_t>(nx * ny));
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      map.centers_.emplace_back(bounds.lo.x() + i * dx, bounds.lo.y() + j * dy);
    }
  }
  map.dimension_ = map.centers_.size();
  return map;
}

Eigen::VectorXd FeatureMap::operator()(const EnvState& state) const {
  Eigen::VectorXd phi = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(dimension_));
  if (kind_ == FeatureKind::kOneHot) {
    const auto* grid = std::get_if<GridState>(&state);
    if (grid == nullptr) throw std::invalid_argument("one-hot features need a grid state");
    if (grid->index >= dimension_) throw std::out_of_range("state index outside feature map");
    phi[static_cast<Eigen::Index>(grid->index)] = 1.0;
    return phi;
  }
  const auto* maze = std::get_if<MazeState>(&state);
  if (maze == nullptr) throw std::invalid_argument("rbf features need a maze state");
  const double inv = 1.0 / (2.0 * bandwidth_ * bandwidth_);
  for (std::size_t k = 0; k < centers_.size(); ++k) {
    phi[static_cast<Eigen::Index>(k)] = std::exp(-(maze->position - centers_[k]).squaredNorm() * inv);
  }
  return phi;
}

double FeatureMap::reference_mass() const {
  if (kind_ == FeatureKind::kOneHot) return 1.0;
  const Vec2 mid = 0.5 * (bounds_.lo + bounds_.hi);
  return (*this)(MazeState{mid}).sum();
}

double logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double sigmoid_value(const SigmoidHead& head, const Eigen::VectorXd& phi) {
  if (head.weights.size() != phi.size()) throw std::invalid_argument("sigmoid head / feature length mismatch");
  return logistic(head.weights.dot(phi));
}

Eigen::VectorXd sigmoid_grad(const SigmoidHead& head, const Eigen::VectorXd& phi) {
  const double s = sigmoid_value(head, phi);
  return (s * (1.0 - s)) * phi;
}

Eigen::VectorXd softmax(const Eigen::VectorXd& logits) {
  const Eigen::VectorXd e = (logits.array() - logits.maxCoeff()).exp().matrix();
  return e / e.sum();
}

Eigen::VectorXd softmax_probs(const SoftmaxHead& head, const Eigen::VectorXd& phi) {
  if (head.weights.cols() != phi.size()) throw std::invalid_argument("softmax head / feature length mismatch");
  return softmax((head.weights * phi) / head.temperature);
}

Eigen::MatrixXd softmax_loggrad(const SoftmaxHead& head, const Eigen::VectorXd& phi, int choice) {
  if (choice < 0 || choice >= head.num_choices()) throw std::out_of_range("softmax choice out of range");
  Eigen::VectorXd coeff = -softmax_probs(head, phi);
  coeff[choice] += 1.0;
  return (coeff / head.temperature) * phi.transpose();
}

}  // namespace ioc
