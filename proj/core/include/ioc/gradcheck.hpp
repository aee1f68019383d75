#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace ioc {

/// Central differences: g_i = (f(x + h e_i) - f(x - h e_i)) / 2h.
/// Throws std::domain_error naming the index when f is non-finite.
Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double step);

/// max_i |analytic_i - fd_i| / max(|fd_i|, 1e-8)
double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd, Eigen::Index* worst = nullptr);

struct FDReport {
  std::string family;
  int instances = 0;
  double max_rel_error = 0.0;
  std::string worst_instance;
  double step = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct GradcheckOptions {
  std::uint64_t seed = 0;
  int instances = 1000;
  double tolerance = 1e-5;
  double step = 1e-6;
};

/// Fuzzes each gradient family (sigmoid, log_softmax, interest_z,
/// policy_over_options, termination_nu) against central differences.
std::vector<FDReport> check_all(const GradcheckOptions& opts);

bool all_pass(const std::vector<FDReport>& reports);

/// family,instances,max_rel_error,worst_instance,step,tolerance,pass
void write_csv(std::ostream& out, const std::vector<FDReport>& reports);

}  // namespace ioc
