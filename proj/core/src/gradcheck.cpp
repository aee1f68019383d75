#include "ioc/gradcheck.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "ioc/critic.hpp"
#include "ioc/learner.hpp"
#include "ioc/options.hpp"
#include "ioc/random.hpp"

namespace ioc {

Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f, const Eigen::VectorXd& x,
                            double step) {
  if (!(step > 0.0)) throw std::invalid_argument("finite-difference step must be positive");
  Eigen::VectorXd g(x.size());
  Eigen::VectorXd probe = x;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    probe[i] = x[i] + step;
    const double up = f(probe);
    probe[i] = x[i] - step;
    const double down = f(probe);
    probe[i] = x[i];
    if (!std::isfinite(up) || !std::isfinite(down)) {
      throw std::domain_error("non-finite function value at index " + std::to_string(i));
    }
    g[i] = (up - down) / (2.0 * step);
  }
  return g;
}

double max_relative_error(const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd, Eigen::Index* worst) {
  if (analytic.size() != fd.size()) throw std::invalid_argument("gradient length mismatch");
  double max_err = 0.0;
  Eigen::Index arg = 0;
  for (Eigen::Index i = 0; i < fd.size(); ++i) {
    double err = std::abs(analytic[i] - fd[i]) / std::max(std::abs(fd[i]), 1e-8);
    if (std::isnan(err)) err = std::numeric_limits<double>::infinity();
    if (err > max_err) {
      max_err = err;
      arg = i;
    }
  }
  if (worst != nullptr) *worst = arg;
  return max_err;
}

namespace {

// Feature entries are bounded away from zero so that every gradient
// component is large relative to the round-off of the difference quotient.
Eigen::VectorXd random_features(Rng& rng, int dim) {
  Eigen::VectorXd phi(dim);
  for (int i = 0; i < dim; ++i) {
    const double magnitude = 0.1 + 0.9 * uniform01(rng);
    phi[i] = uniform01(rng) < 0.5 ? -magnitude : magnitude;
  }
  return phi;
}

Eigen::VectorXd random_vector(Rng& rng, Eigen::Index n, double scale) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v[i] = scale * (2.0 * uniform01(rng) - 1.0);
  return v;
}

int random_int(Rng& rng, int lo, int hi) { return lo + static_cast<int>(uniform_index(rng, hi - lo + 1)); }

Eigen::VectorXd flatten(const Eigen::MatrixXd& m) { return Eigen::Map<const Eigen::VectorXd>(m.data(), m.size()); }

Eigen::MatrixXd unflatten(const Eigen::VectorXd& v, Eigen::Index rows, Eigen::Index cols) {
  return Eigen::Map<const Eigen::MatrixXd>(v.data(), rows, cols);
}

struct Tracker {
  FDReport report;

  void record(int instance, const Eigen::VectorXd& analytic, const Eigen::VectorXd& fd) {
    Eigen::Index worst = 0;
    const double err = max_relative_error(analytic, fd, &worst);
    ++report.instances;
    if (err > report.max_rel_error || report.worst_instance.empty()) {
      report.max_rel_error = std::max(report.max_rel_error, err);
      report.worst_instance = fmt::format("instance {} component {} analytic {:.17g} fd {:.17g}", instance, worst,
                                          analytic[worst], fd[worst]);
    }
  }
};

std::vector<OptionParams> random_options(Rng& rng, int n_options, int n_actions, int dim) {
  std::vector<OptionParams> options;
  for (int w = 0; w < n_options; ++w) {
    OptionParams opt = make_option(static_cast<std::size_t>(dim), n_actions, 1.0, 0.0);
    opt.intra_policy.weights = unflatten(random_vector(rng, n_actions * dim, 0.5), n_actions, dim);
    opt.termination.weights = random_vector(rng, dim, 0.5);
    opt.interest.weights = random_vector(rng, dim, 0.5);
    options.push_back(std::move(opt));
  }
  return options;
}

PolicyOverOptions random_policy(Rng& rng, int n_options, int dim) {
  PolicyOverOptions policy = PolicyOverOptions::learned_softmax(n_options, static_cast<std::size_t>(dim),
                                                                0.5 + 1.5 * uniform01(rng));
  policy.head().weights = unflatten(random_vector(rng, n_options * dim, 0.5), n_options, dim);
  return policy;
}

}  // namespace

std::vector<FDReport> check_all(const GradcheckOptions& opts) {
  Rng rng(opts.seed);
  const double h = opts.step;
  auto make = [&](const char* name) {
    Tracker t;
    t.report.family = name;
    t.report.step = opts.step;
    t.report.tolerance = opts.tolerance;
    return t;
  };

  Tracker sig = make("sigmoid");
  Tracker logsm = make("log_softmax");
  Tracker interest = make("interest_z");
  Tracker pio = make("policy_over_options");
  Tracker term = make("termination_nu");

  for (int i = 0; i < opts.instances; ++i) {
    // sigmoid head
    {
      const int dim = random_int(rng, 1, 8);
      const Eigen::VectorXd phi = random_features(rng, dim);
      const SigmoidHead head{random_vector(rng, dim, 1.0)};
      const auto f = [&](const Eigen::VectorXd& w) { return sigmoid_value(SigmoidHead{w}, phi); };
      sig.record(i, sigmoid_grad(head, phi), fd_gradient(f, head.weights, h));
    }
    // log of a Boltzmann probability
    {
      const int dim = random_int(rng, 1, 6);
      const int choices = random_int(rng, 2, 6);
      const Eigen::VectorXd phi = random_features(rng, dim);
      SoftmaxHead head{unflatten(random_vector(rng, choices * dim, 1.0), choices, dim), 0.5 + 1.5 * uniform01(rng)};
      const int choice = random_int(rng, 0, choices - 1);
      const auto f = [&](const Eigen::VectorXd& w) {
        const SoftmaxHead probe{unflatten(w, choices, dim), head.temperature};
        return std::log(softmax_probs(probe, phi)[choice]);
      };
      logsm.record(i, flatten(softmax_loggrad(head, phi, choice)), fd_gradient(f, flatten(head.weights), h));
    }
    // pi_I(target | s) w.r.t. every option's interest weights
    {
      const int dim = random_int(rng, 1, 5);
      const int n = random_int(rng, 1, 5);
      const Eigen::VectorXd phi = random_features(rng, dim);
      std::vector<OptionParams> options = random_options(rng, n, 2, dim);
      const PolicyOverOptions policy =
          uniform01(rng) < 0.5 ? PolicyOverOptions::fixed_uniform(n) : random_policy(rng, n, dim);
      const int target = random_int(rng, 0, n - 1);

      Eigen::VectorXd z(n * dim);
      for (int w = 0; w < n; ++w) z.segment(w * dim, dim) = options[static_cast<std::size_t>(w)].interest.weights;
      const auto f = [&](const Eigen::VectorXd& zz) {
        std::vector<OptionParams> probe = options;
        for (int w = 0; w < n; ++w) probe[static_cast<std::size_t>(w)].interest.weights = zz.segment(w * dim, dim);
        return interest_policy(probe, policy, phi).probs[target];
      };
      const auto grads = interest_policy_grad_z(options, policy, phi, target);
      Eigen::VectorXd analytic(n * dim);
      for (int w = 0; w < n; ++w) analytic.segment(w * dim, dim) = grads[static_cast<std::size_t>(w)];
      interest.record(i, analytic, fd_gradient(f, z, h));
    }
    // pi_I(target | s) w.r.t. the softmax policy over options
    {
      const int dim = random_int(rng, 1, 5);
      const int n = random_int(rng, 2, 5);
      const Eigen::VectorXd phi = random_features(rng, dim);
      const std::vector<OptionParams> options = random_options(rng, n, 2, dim);
      const PolicyOverOptions policy = random_policy(rng, n, dim);
      const int target = random_int(rng, 0, n - 1);
      const auto f = [&](const Eigen::VectorXd& w) {
        PolicyOverOptions probe = policy;
        probe.head().weights = unflatten(w, n, dim);
        return interest_policy(options, probe, phi).probs[target];
      };
      pio.record(i, flatten(policy_over_options_grad(policy, options, phi, target)),
                 fd_gradient(f, flatten(policy.head().weights), h));
    }
    // Termination update as applied by improvement_step, against
    // -alpha_nu * (Q_Omega(s', w) - V_Omega(s')) * d beta(s') / d nu.
    {
      const int dim = random_int(rng, 1, 5);
      const int n = random_int(rng, 2, 4);
      const int n_actions = random_int(rng, 2, 4);
      const Eigen::VectorXd phi = random_features(rng, dim);
      const Eigen::VectorXd phi_next = random_features(rng, dim);
      AgentParams params;
      params.options = random_options(rng, n, n_actions, dim);
      params.policy = PolicyOverOptions::fixed_uniform(n);
      QUTable critic(n, n_actions, static_cast<std::size_t>(dim), 0.9);
      for (int w = 0; w < n; ++w) {
        critic.weights(w) = unflatten(random_vector(rng, n_actions * dim, 5.0), n_actions, dim);
      }
      LearnerConfig cfg;
      cfg.num_options = n;
      cfg.theta_lr = 0.0;
      cfg.z_lr = 0.0;
      cfg.omega_lr = 0.0;
      cfg.nu_lr = 1.0;

      StepContext ctx;
      ctx.phi = &phi;
      ctx.phi_next = &phi_next;
      ctx.option = random_int(rng, 0, n - 1);
      ctx.action = random_int(rng, 0, n_actions - 1);
      ctx.next_option = random_int(rng, 0, n - 1);

      const OptionParams& opt = params.options[static_cast<std::size_t>(ctx.option)];
      const Eigen::VectorXd q_next = q_omega_all(critic, params.options, phi_next);
      const double advantage = q_next[ctx.option] - v_omega(q_next, option_distribution(params, phi_next, cfg));
      const Eigen::VectorXd nu0 = opt.termination.weights;

      AgentParams updated = params;
      improvement_step(updated, critic, ctx, cfg);
      const Eigen::VectorXd applied =
          (updated.options[static_cast<std::size_t>(ctx.option)].termination.weights - nu0) / (-advantage);

      const auto f = [&](const Eigen::VectorXd& nu) { return sigmoid_value(SigmoidHead{nu}, phi_next); };
      term.record(i, applied, fd_gradient(f, nu0, h));
    }
  }

  std::vector<FDReport> out;
  for (Tracker* t : {&sig, &logsm, &interest, &pio, &term}) {
    t->report.pass = t->report.max_rel_error <= opts.tolerance;
    out.push_back(t->report);
  }
  return out;
}

bool all_pass(const std::vector<FDReport>& reports) {
  for (const FDReport& r : reports) {
    if (!r.pass) return false;
  }
  return true;
}

void write_csv(std::ostream& out, const std::vector<FDReport>& reports) {
  out << "family,instances,max_rel_error,worst_instance,step,tolerance,pass\n";
  for (const FDReport& r : reports) {
    fmt::print(out, "{},{},{:.6e},\"{}\",{:g},{:g},{}\n", r.family, r.instances, r.max_rel_error, r.worst_instance,
               r.step, r.tolerance, r.pass ? 1 : 0);
  }
}

}  // namespace ioc
