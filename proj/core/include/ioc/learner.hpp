#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "ioc/critic.hpp"
#include "ioc/env.hpp"
#include "ioc/funcapprox.hpp"
#include "ioc/options.hpp"
#include "ioc/random.hpp"

namespace ioc {

enum class AgentKind { kIoc, kOc };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(std::string_view name);

/// Which options the max in the TD target ranges over.
/// kAuto: every option when threshold_k == 0, the available set otherwise.
enum class MaxMode { kAuto, kAll, kAvailable };

std::string to_string(MaxMode mode);
MaxMode parse_max_mode(std::string_view name);

struct LearnerConfig {
  double critic_lr = 0.25;
  double theta_lr = 0.25;
  double nu_lr = 0.15;
  double z_lr = 0.05;
  double omega_lr = 0.05;
  double gamma = 0.9;
  int episodes = 500;
  int max_steps = 2000;
  double threshold_k = 0.0;
  AgentKind agent = AgentKind::kIoc;
  PolicyKind policy_over_options = PolicyKind::kFixedUniform;
  /// Subtract Q_Omega(s, w) from Q_U(s, w, a) in the intra-policy update.
  bool theta_baseline = false;
  std::uint64_t seed = 0;
  int num_options = 4;
  double temperature = 1.0;
  /// Initial termination logit (0 gives beta = 0.5; -4.6 gives beta ~ 0.01).
  double nu_init = 0.0;
  /// Initial interest logit (0 gives I = 0.5 everywhere).
  double z_init = 0.0;
  MaxMode max_mode = MaxMode::kAuto;
  /// Scale improvement updates by gamma^t within the episode.
  bool discount_weighting = false;
  /// Episode index at which the most visited maze goal is removed.
  std::optional<int> transfer_at;
};

/// Throws std::invalid_argument describing the first bad field.
void validate(const LearnerConfig& cfg);

struct AgentParams {
  std::vector<OptionParams> options;
  PolicyOverOptions policy;
};

/// Exact equality of every weight, including the policy over options.
bool bit_identical(const AgentParams& a, const AgentParams& b);

AgentParams initial_params(const LearnerConfig& cfg, const FeatureMap& features, int num_actions);

struct StepTrace {
  int episode = 0;
  int t = 0;
  EnvState state;
  int option = 0;
  int action = 0;
  double reward = 0.0;
  EnvState next_state;
  bool terminal = false;
  bool option_terminated = false;
  int next_option = 0;
};

struct EpisodeMetrics {
  int steps = 0;
  double ret = 0.0;
  double discounted_return = 0.0;
  bool reached_goal = false;
  std::optional<int> goal_index;
  int terminations = 0;
  std::vector<int> option_steps;
  std::vector<int> option_initiations;

  bool operator==(const EpisodeMetrics&) const = default;
};

struct TransferEvent {
  int episode = 0;
  int removed_goal = 0;
  std::vector<int> visit_counts;
};

class Learner;

struct TrainHooks {
  std::function<void(const StepTrace&)> on_step;
  std::function<void(int episode, const EpisodeMetrics&, const Learner&)> on_episode_end;
};

struct RunMetrics {
  std::vector<EpisodeMetrics> episodes;
  AgentParams final_params;
  QUTable final_critic;
  std::vector<TransferEvent> transfers;
  std::vector<int> goal_visits;
};

/// Inputs to one evaluation + improvement pass.
struct StepContext {
  const Eigen::VectorXd* phi = nullptr;       // phi(s)
  const Eigen::VectorXd* phi_next = nullptr;  // phi(s')
  int option = 0;
  int action = 0;
  int next_option = 0;
  double reward = 0.0;
  bool terminal = false;
  /// gamma^t when discount weighting is on, otherwise 1.
  double weight = 1.0;
};

/// Distribution used to pick options at a state: pi_I (IOC, restricted to the
/// options with interest >= k) or plain pi_Omega (OC).
InterestPolicyEval option_distribution(const AgentParams& params, const Eigen::VectorXd& phi,
                                       const LearnerConfig& cfg);

/// Intra-option Q-learning update of Q_U(s, w, a). Returns delta.
double evaluation_step(QUTable& critic, const AgentParams& params, const StepContext& ctx,
                       const LearnerConfig& cfg);

/// Applies the theta, nu and z updates (and pi_Omega when learned). All
/// quantities are read from the parameters as they were on entry. The
/// termination, interest and pi_Omega updates are skipped on terminal steps.
/// Throws DivergenceError("diverged learner ...") on non-finite results.
void improvement_step(AgentParams& params, const QUTable& critic, const StepContext& ctx,
                      const LearnerConfig& cfg);

class Learner {
 public:
  Learner(LearnerConfig cfg, FeatureMap features, int num_actions);

  const LearnerConfig& config() const { return cfg_; }
  const FeatureMap& features() const { return features_; }
  AgentParams& params() { return params_; }
  const AgentParams& params() const { return params_; }
  QUTable& critic() { return critic_; }
  const QUTable& critic() const { return critic_; }

  /// Call-and-return rollout with learning at every step. `start` overrides
  /// env.reset().
  EpisodeMetrics run_episode(const Environment& env, Rng& rng, const TrainHooks* hooks = nullptr,
                             int episode_index = 0, std::optional<EnvState> start = std::nullopt);

 private:
  LearnerConfig cfg_;
  FeatureMap features_;
  int num_actions_;
  AgentParams params_;
  QUTable critic_;
};

/// Removes the most visited maze goal when episode_index equals transfer_at.
/// Grid environments are left untouched with a warning.
std::optional<TransferEvent> transfer_switch(Environment& env, std::span<const int> visit_counts, int episode_index,
                                             std::optional<int> transfer_at);

/// Full training run from freshly initialized parameters. `env` is mutated by
/// the transfer hook.
RunMetrics train(Environment& env, const FeatureMap& features, const LearnerConfig& cfg,
                 const TrainHooks& hooks = {});

}  // namespace ioc
