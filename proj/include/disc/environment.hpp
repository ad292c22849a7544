#pragma once

#include "disc/seeding.hpp"
#include "disc/tasks.hpp"

#include <Eigen/Dense>

#include <string>
#include <vector>

namespace disc {

/// Law over contexts that agents observe in place of the hidden realized context.
struct ContextDistribution {
  std::vector<int> support;
  std::vector<double> probs;

  static ContextDistribution point_mass(int context);
  static ContextDistribution uniform(int num_contexts);
};

std::vector<std::string> validate(const ContextDistribution& mu, int num_contexts);

struct BaselineInfo {
  int action = -1;
  double reward = 0.0;  // expected reward under the round's context distribution
};

struct ActionValue {
  int action = -1;
  double reward = 0.0;
};

/// Per-agent feature tables stored lifted into the shared space.
/// tables[agent][context] is a K x d matrix whose row x is phi_i(x, c).
class Environment {
 public:
  using Table = std::vector<Eigen::MatrixXd>;

  Environment(TaskSpec tasks, std::vector<Table> tables, Eigen::VectorXd theta_star, double noise_sigma,
              int baseline_rank);

  int num_agents() const { return tasks_.num_agents(); }
  int num_actions() const { return static_cast<int>(tables_.front().front().rows()); }
  int num_contexts() const { return static_cast<int>(tables_.front().size()); }
  int dim() const { return tasks_.dim; }

  const TaskSpec& tasks() const { return tasks_; }
  const Eigen::VectorXd& theta_star() const { return theta_star_; }
  double noise_sigma() const { return noise_sigma_; }
  int baseline_rank() const { return baseline_rank_; }

  const Eigen::MatrixXd& features(int agent, int context) const {
    return tables_.at(static_cast<std::size_t>(agent)).at(static_cast<std::size_t>(context));
  }
  Eigen::VectorXd feature(int agent, int action, int context) const {
    return features(agent, context).row(action).transpose();
  }

  /// Norm, reward-range, and lifting violations; empty when all invariants hold.
  std::vector<std::string> check_invariants(double tol = 1e-12) const;

  /// Single-agent environment holding only `agent`'s table.
  Environment agent_slice(int agent) const;

 private:
  TaskSpec tasks_;
  std::vector<Table> tables_;
  Eigen::VectorXd theta_star_;
  double noise_sigma_;
  int baseline_rank_;
};

/// Row x is psi_i(x, mu) = sum_c mu(c) phi_i(x, c).
Eigen::MatrixXd expected_features(const Environment& env, int agent, const ContextDistribution& mu);

int sample_context(const ContextDistribution& mu, Rng& rng);

/// feature^T theta* + eta, eta ~ N(0, sigma^2).
double realize_reward(const Environment& env, const Eigen::VectorXd& feature, Rng& rng);

/// k-th best action by expected reward psi^T theta*; ties to the lowest id.
BaselineInfo baseline_for_round(const Environment& env, const Eigen::MatrixXd& psis);
BaselineInfo baseline_for_round(const Environment& env, int agent, const ContextDistribution& mu);

ActionValue optimal_action(const Environment& env, const Eigen::MatrixXd& psis);
ActionValue optimal_action(const Environment& env, int agent, const ContextDistribution& mu);

/// True iff feature^T theta* < (1 - alpha) r_b (with 1e-12 slack).
bool check_violation(const Environment& env, const Eigen::VectorXd& feature, double r_b, double alpha);

enum class ContextLaw { RandomSupport, FixedUniform };

struct ScheduleParams {
  ContextLaw law = ContextLaw::RandomSupport;
  int support_size = 5;
};

/// One context distribution per round.
std::vector<ContextDistribution> make_schedule(int num_contexts, int rounds, const ScheduleParams& params,
                                               Rng& rng);

/// Assumption-3 style constants for one agent over a whole schedule.
struct RewardBounds {
  double r_l = 0.0;
  double r_h = 0.0;
  double kappa_l = 0.0;
  double kappa_h = 0.0;
};

RewardBounds scan_reward_bounds(const Environment& env, int agent, const std::vector<ContextDistribution>& schedule);

struct SynthParams {
  int num_actions = 40;
  int num_contexts = 20;
  Eigen::VectorXd theta_star;
  double noise_sigma = 0.05;
  int baseline_rank = 10;
  double context_spread = 0.1;  // std of per-context perturbation around each action's base feature
};

/// Standard-normal features per (agent, action), per-context Gaussian perturbations,
/// lifted by the task spec and rescaled so every ||phi|| <= 1 and phi^T theta* in [0, 1].
Environment synth_generate(const SynthParams& params, const TaskSpec& tasks, Rng& rng);

/// Shared table (K x d per context) masked per agent by its index set.
Environment from_feature_table(const Environment::Table& table, const TaskSpec& tasks,
                               const Eigen::VectorXd& theta_star, double noise_sigma, int baseline_rank);

/// agent,action,context,f1..fd with 0-based ids.
void write_feature_csv(const Environment& env, const std::string& path);

}  // namespace disc
