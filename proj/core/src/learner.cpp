#include "ioc/learner.hpp"

#include <cmath>
#include <iostream>
#include <sstream>

namespace ioc {

std::string to_string(AgentKind kind) { return kind == AgentKind::kIoc ? "ioc" : "oc"; }

AgentKind parse_agent_kind(std::string_view name) {
  if (name == "ioc") return AgentKind::kIoc;
  if (name == "oc") return AgentKind::kOc;
  throw std::invalid_argument("unknown agent '" + std::string(name) + "'");
}

std::string to_string(MaxMode mode) {
  switch (mode) {
    case MaxMode::kAuto: return "auto";
    case MaxMode::kAll: return "all";
    case MaxMode::kAvailable: return "available";
  }
  return "auto";
}

MaxMode parse_max_mode(std::string_view name) {
  if (name == "auto") return MaxMode::kAuto;
  if (name == "all") return MaxMode::kAll;
  if (name == "available") return MaxMode::kAvailable;
  throw std::invalid_argument("unknown max mode '" + std::string(name) + "'");
}

void validate(const LearnerConfig& cfg) {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw std::invalid_argument(what);
  };
  require(cfg.critic_lr > 0.0, "learner.critic_lr must be positive");
  require(cfg.theta_lr >= 0.0 && cfg.nu_lr >= 0.0 && cfg.z_lr >= 0.0 && cfg.omega_lr >= 0.0,
          "learning rates must be non-negative");
  require(cfg.gamma >= 0.0 && cfg.gamma < 1.0, "learner.gamma must lie in [0, 1)");
  require(cfg.episodes >= 0, "learner.episodes must be non-negative");
  require(cfg.max_steps >= 1, "learner.max_steps must be positive");
  require(cfg.threshold_k >= 0.0 && cfg.threshold_k <= 1.0, "learner.threshold_k must lie in [0, 1]");
  require(cfg.num_options >= 1, "learner.num_options must be positive");
  require(cfg.temperature > 0.0, "learner.temperature must be positive");
  require(!cfg.transfer_at || *cfg.transfer_at >= 0, "learner.transfer_at must be non-negative");
}

bool bit_identical(const AgentParams& a, const AgentParams& b) {
  if (a.options.size() != b.options.size()) return false;
  for (std::size_t w = 0; w < a.options.size(); ++w) {
    const OptionParams& x = a.options[w];
    const OptionParams& y = b.options[w];
    if (x.intra_policy.weights != y.intra_policy.weights || x.termination.weights != y.termination.weights ||
        x.interest.weights != y.interest.weights) {
      return false;
    }
  }
  if (a.policy.kind() != b.policy.kind()) return false;
  if (a.policy.kind() == PolicyKind::kLearnedSoftmax && a.policy.head().weights != b.policy.head().weights) {
    return false;
  }
  return true;
}

AgentParams initial_params(const LearnerConfig& cfg, const FeatureMap& features, int num_actions) {
  AgentParams params;
  const double mass = features.reference_mass();
  for (int w = 0; w < cfg.num_options; ++w) {
    params.options.push_back(
        make_option(features.dimension(), num_actions, cfg.temperature, cfg.nu_init / mass, cfg.z_init / mass));
  }
  params.policy = cfg.policy_over_options == PolicyKind::kFixedUniform
                      ? PolicyOverOptions::fixed_uniform(cfg.num_options)
                      : PolicyOverOptions::learned_softmax(cfg.num_options, features.dimension(), cfg.temperature);
  return params;
}

InterestPolicyEval option_distribution(const AgentParams& params, const Eigen::VectorXd& phi,
                                       const LearnerConfig& cfg) {
  if (cfg.agent == AgentKind::kOc) {
    InterestPolicyEval eval;
    eval.base_probs = params.policy.probs(phi);
    eval.probs = eval.base_probs;
    eval.interests = Eigen::VectorXd::Ones(eval.probs.size());
    return eval;
  }
  InterestPolicyEval eval = interest_policy(params.options, params.policy, phi);
  if (cfg.threshold_k > 0.0) eval = restrict_to(eval, available_options(eval, cfg.threshold_k));
  return eval;
}

namespace {

std::vector<int> max_candidates(const AgentParams& params, const Eigen::VectorXd& phi, const LearnerConfig& cfg) {
  const bool restrict = cfg.agent == AgentKind::kIoc &&
                        (cfg.max_mode == MaxMode::kAvailable ||
                         (cfg.max_mode == MaxMode::kAuto && cfg.threshold_k > 0.0));
  if (!restrict) return {};
  return available_options(option_distribution(params, phi, cfg), cfg.threshold_k);
}

void require_finite(double value, const char* what, const StepContext& ctx) {
  if (std::isfinite(value)) return;
  std::ostringstream msg;
  msg << "diverged learner: non-finite " << what << " (option " << ctx.option << ", action " << ctx.action
      << ", next option " << ctx.next_option << ", reward " << ctx.reward << ")";
  throw DivergenceError(msg.str());
}

}  // namespace

double evaluation_step(QUTable& critic, const AgentParams& params, const StepContext& ctx,
                       const LearnerConfig& cfg) {
  TdInputs in;
  in.reward = ctx.reward;
  in.terminal = ctx.terminal;
  in.option = ctx.option;
  in.action = ctx.action;
  std::vector<int> candidates;
  if (!ctx.terminal) {
    in.beta_next = termination_prob(params.options[static_cast<std::size_t>(ctx.option)], *ctx.phi_next);
    in.q_omega_next = q_omega_all(critic, params.options, *ctx.phi_next);
    candidates = max_candidates(params, *ctx.phi_next, cfg);
    in.max_over = candidates;
  }
  const double delta = td_error(critic, *ctx.phi, in);
  critic.update(*ctx.phi, ctx.option, ctx.action, delta, cfg.critic_lr);
  return delta;
}

void improvement_step(AgentParams& params, const QUTable& critic, const StepContext& ctx,
                      const LearnerConfig& cfg) {
  OptionParams& opt = params.options[static_cast<std::size_t>(ctx.option)];
  const Eigen::VectorXd& phi = *ctx.phi;

  // Intra-option policy.
  double q_u = critic.value(phi, ctx.option, ctx.action);
  if (cfg.theta_baseline) q_u -= q_omega(critic, opt, ctx.option, phi);
  require_finite(q_u, "intra-policy advantage", ctx);
  const Eigen::MatrixXd grad_theta = softmax_loggrad(opt.intra_policy, phi, ctx.action);

  if (ctx.terminal) {
    opt.intra_policy.weights += (ctx.weight * cfg.theta_lr * q_u) * grad_theta;
    return;
  }

  const Eigen::VectorXd& phi_next = *ctx.phi_next;
  const InterestPolicyEval eval_next = option_distribution(params, phi_next, cfg);
  const Eigen::VectorXd q_next = q_omega_all(critic, params.options, phi_next);
  const double v_next = v_omega(q_next, eval_next);
  const double beta_next = termination_prob(opt, phi_next);

  // Termination: lower beta where continuing beats the state value.
  const double advantage = q_next[ctx.option] - v_next;
  require_finite(advantage, "termination advantage", ctx);
  const Eigen::VectorXd grad_nu = sigmoid_grad(opt.termination, phi_next);

  // Option selection: gated by the probability that w actually ended at s'.
  const double q_selected = q_next[ctx.next_option];
  require_finite(q_selected, "selected option value", ctx);
  const double select_scale = ctx.weight * beta_next * q_selected;

  std::vector<Eigen::VectorXd> grad_z;
  if (cfg.agent == AgentKind::kIoc) grad_z = interest_policy_grad_z(eval_next, phi_next, ctx.next_option);

  Eigen::MatrixXd grad_policy;
  if (params.policy.kind() == PolicyKind::kLearnedSoftmax) {
    if (cfg.agent == AgentKind::kIoc) {
      grad_policy = policy_over_options_grad(eval_next, params.policy, phi_next, ctx.next_option);
    } else {
      // d pi_Omega(w'|s') / dW = pi_Omega(w'|s') d log pi_Omega(w'|s') / dW
      grad_policy = eval_next.base_probs[ctx.next_option] *
                    softmax_loggrad(params.policy.head(), phi_next, ctx.next_option);
    }
  }

  opt.intra_policy.weights += (ctx.weight * cfg.theta_lr * q_u) * grad_theta;
  opt.termination.weights -= (ctx.weight * cfg.nu_lr * advantage) * grad_nu;
  for (std::size_t j = 0; j < grad_z.size(); ++j) {
    params.options[j].interest.weights += (cfg.z_lr * select_scale) * grad_z[j];
  }
  if (grad_policy.size() > 0) params.policy.head().weights += (cfg.omega_lr * select_scale) * grad_policy;
}

Learner::Learner(LearnerConfig cfg, FeatureMap features, int num_actions)
    : cfg_(std::move(cfg)), features_(std::move(features)), num_actions_(num_actions) {
  validate(cfg_);
  params_ = initial_params(cfg_, features_, num_actions_);
  critic_ = QUTable(cfg_.num_options, num_actions_, features_.dimension(), cfg_.gamma);
}

EpisodeMetrics Learner::run_episode(const Environment& env, Rng& rng, const TrainHooks* hooks, int episode_index,
                                    std::optional<EnvState> start) {
  if (env.num_actions() != num_actions_) throw std::invalid_argument("environment action count changed");
  const auto n_options = static_cast<std::size_t>(cfg_.num_options);
  EpisodeMetrics m;
  m.option_steps.assign(n_options, 0);
  m.option_initiations.assign(n_options, 0);

  EnvState state = start ? *start : env.reset(rng);
  Eigen::VectorXd phi = features_(state);
  int option = sample_categorical(option_distribution(params_, phi, cfg_).probs, rng);
  ++m.option_initiations[static_cast<std::size_t>(option)];

  double discount = 1.0;
  for (int t = 0; t < cfg_.max_steps; ++t) {
    const OptionParams& opt = params_.options[static_cast<std::size_t>(option)];
    const int action = sample_categorical(intra_action_probs(opt, phi), rng);
    const Transition tr = env.step(state, action, rng);
    const Eigen::VectorXd phi_next = features_(tr.next_state);

    int next_option = option;
    bool terminated = false;
    if (!tr.terminal) {
      const double beta = termination_prob(opt, phi_next);
      if (uniform01(rng) < beta) {
        terminated = true;
        next_option = sample_categorical(option_distribution(params_, phi_next, cfg_).probs, rng);
      }
    }

    StepContext ctx;
    ctx.phi = &phi;
    ctx.phi_next = &phi_next;
    ctx.option = option;
    ctx.action = action;
    ctx.next_option = next_option;
    ctx.reward = tr.reward;
    ctx.terminal = tr.terminal;
    ctx.weight = cfg_.discount_weighting ? discount : 1.0;

    evaluation_step(critic_, params_, ctx, cfg_);
    improvement_step(params_, critic_, ctx, cfg_);

    ++m.steps;
    ++m.option_steps[static_cast<std::size_t>(option)];
    m.ret += tr.reward;
    m.discounted_return += discount * tr.reward;
    discount *= cfg_.gamma;
    if (terminated) {
      ++m.terminations;
      ++m.option_initiations[static_cast<std::size_t>(next_option)];
    }

    if (hooks != nullptr && hooks->on_step) {
      hooks->on_step(StepTrace{episode_index, t, state, option, action, tr.reward, tr.next_state, tr.terminal,
                               terminated, next_option});
    }

    if (tr.terminal) {
      m.reached_goal = true;
      m.goal_index = tr.goal_index;
      break;
    }
    state = tr.next_state;
    phi = phi_next;
    option = next_option;
  }
  return m;
}

std::optional<TransferEvent> transfer_switch(Environment& env, std::span<const int> visit_counts, int episode_index,
                                             std::optional<int> transfer_at) {
  if (!transfer_at || episode_index != *transfer_at) return std::nullopt;
  auto* maze = dynamic_cast<PointMaze*>(&env);
  if (maze == nullptr) {
    std::cerr << "warning: transfer not defined for grid\n";
    return std::nullopt;
  }
  const MazeSpec before = maze->spec();
  MazeSpec after = remove_most_visited_goal(before, visit_counts);
  TransferEvent event;
  event.episode = episode_index;
  event.visit_counts.assign(visit_counts.begin(), visit_counts.end());
  for (std::size_t g = 0; g < before.goals.size(); ++g) {
    if (before.goals[g].active && !after.goals[g].active) event.removed_goal = static_cast<int>(g);
  }
  maze->set_spec(std::move(after));
  return event;
}

RunMetrics train(Environment& env, const FeatureMap& features, const LearnerConfig& cfg, const TrainHooks& hooks) {
  Learner learner(cfg, features, env.num_actions());
  Rng rng(cfg.seed);

  RunMetrics run;
  std::size_t num_goals = 1;
  if (const auto* maze = dynamic_cast<const PointMaze*>(&env)) num_goals = maze->spec().goals.size();
  run.goal_visits.assign(num_goals, 0);
  run.episodes.reserve(static_cast<std::size_t>(cfg.episodes));

  for (int ep = 0; ep < cfg.episodes; ++ep) {
    if (auto event = transfer_switch(env, run.goal_visits, ep, cfg.transfer_at)) {
      run.transfers.push_back(std::move(*event));
    }
    EpisodeMetrics m = learner.run_episode(env, rng, &hooks, ep);
    if (m.goal_index && static_cast<std::size_t>(*m.goal_index) < num_goals) {
      ++run.goal_visits[static_cast<std::size_t>(*m.goal_index)];
    }
    if (hooks.on_episode_end) hooks.on_episode_end(ep, m, learner);
    run.episodes.push_back(std::move(m));
  }
  run.final_params = learner.params();
  run.final_critic = learner.critic();
  return run;
}

}  // namespace ioc
