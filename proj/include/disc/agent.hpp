#pragma once

#include "disc/environment.hpp"
#include "disc/numerics.hpp"
#include "disc/seeding.hpp"

#include <Eigen/Dense>

#include <string>
#include <string_view>
#include <variant>
#include <vector>

namespace disc {

enum class Mode {
  KnownBaseline,    // disc-ucb
  UnknownBaseline,  // disc-ucb-ub
  Unconstrained,    // dislinucb: no pruning, no gate, never conservative
  Independent,      // disc-ucb selection without any communication
};

std::string_view to_string(Mode mode);
Mode parse_mode(std::string_view name);
bool is_constrained(Mode mode);

struct AgentParams {
  double lambda = 1.0;
  double delta = 1e-3;
  double alpha = 0.3;
  double sigma = 0.05;
  double rho = 0.0;
  double r_l = 0.0;
  double r_h = 1.0;
  Mode mode = Mode::KnownBaseline;
};

/// Largest admissible mixing weight for the conservative vector: alpha r_l / (1 + r_h)
/// with a known baseline, 0.99 alpha r_l / 2 when the baseline reward is unknown
/// (that range is open at the top).
double default_rho(Mode mode, double alpha, double r_l, double r_h);

/// Throws if rho lies outside the mode's safe range.
void check_rho(const AgentParams& params);

/// Sufficient statistics held by one agent. W_loc/U_loc accumulate since the last sync.
struct AgentState {
  int id = 0;
  AgentParams params;
  SymPsd w_loc;
  SymPsd w_syn;
  Eigen::VectorXd u_loc;
  Eigen::VectorXd u_syn;
  int t_last = 0;
  double logdet_v_last = 0.0;  // ln det(lambda I + W_syn) at the last sync

  static AgentState fresh(int id, int dim, const AgentParams& params);

  int dim() const { return static_cast<int>(w_loc.dim()); }
  /// lambda I + W_syn + W_loc
  SymPsd gram() const;
};

/// Radius of the confidence ellipsoid, evaluated with noise sqrt(1 + sigma^2) and
/// failure probability delta / 2.
double confidence_radius(const SymPsd& v_bar, double lambda, double sigma, double delta, int dim);

/// Ridge estimate (lambda I + W_syn + W_loc)^{-1} (U_syn + U_loc).
Eigen::VectorXd estimate(const AgentState& state);

/// max over the ellipsoid ||theta - theta_hat||_V <= beta of psi^T theta.
double ucb_value(const Eigen::VectorXd& psi, const Eigen::VectorXd& theta_hat, double beta, const SymPsd& v_bar);
double ucb_value(const Eigen::VectorXd& psi, const Eigen::VectorXd& theta_hat, double beta,
                 const PsdFactor<double>& v_bar);

/// True iff ||theta - theta_hat||_V <= beta.
bool in_confidence_set(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_hat, double beta,
                       const SymPsd& v_bar);

struct PruneResult {
  std::vector<int> actions;  // ascending ids
  double threshold = 0.0;
};

/// Actions with psi^T theta_hat >= beta / sqrt(lambda_min) + (1 - alpha) r_b. Rows of `psis` are actions.
PruneResult prune_known(const Eigen::MatrixXd& psis, const Eigen::VectorXd& theta_hat, double beta, double lambda_min,
                        double alpha, double r_b);

/// Same with r_b replaced by the optimistic value of the baseline feature over the ellipsoid.
PruneResult prune_unknown(const Eigen::MatrixXd& psis, const Eigen::VectorXd& psi_b, const Eigen::VectorXd& theta_hat,
                          double beta, const SymPsd& v_bar, double lambda_min, double alpha);

/// Eigenvalue level the gate requires: (2 beta / (alpha r_b))^2 with a known baseline,
/// (2 (2 - alpha) beta / (alpha r_l))^2 otherwise. Zero in unconstrained mode.
double gate_threshold(double beta, double alpha, double reward_bound, Mode mode);
bool gate(double beta, double lambda_min, double alpha, double reward_bound, Mode mode);

struct ConservativeVector {
  Eigen::VectorXd psi;
  Eigen::VectorXd zeta;
};

/// (1 - rho) psi_b + rho zeta with zeta uniform on the unit sphere.
ConservativeVector conservative_vector(const Eigen::VectorXd& psi_b, double rho, Rng& rng);

struct AgentAction {
  int action = -1;
  Eigen::VectorXd psi;
};

struct Conservative {
  int baseline_action = -1;
  Eigen::VectorXd psi;   // the conservative expected feature
  Eigen::VectorXd zeta;
};

struct Diagnostics {
  double beta = 0.0;
  double lambda_min = 0.0;
  double prune_threshold = 0.0;
  double gate_threshold = 0.0;
  bool gate_passed = false;
  std::vector<int> pruned;
  Eigen::VectorXd theta_hat;
};

struct Decision {
  std::variant<AgentAction, Conservative> kind;
  Diagnostics diag;

  bool conservative() const { return std::holds_alternative<Conservative>(kind); }
  /// Action id, or -1 for a conservative play.
  int action() const;
  /// The expected feature the agent updates with.
  const Eigen::VectorXd& psi() const;
};

/// One round of selection for one agent given this round's expected features.
Decision select(const AgentState& state, const Eigen::MatrixXd& psis, const BaselineInfo& baseline, Rng& rng);

/// W_loc += psi psi^T, U_loc += psi y.
void local_update(AgentState& state, const Eigen::VectorXd& psi, double y);

/// (ln det V_t - ln det V_last) (t - t_last) >= B.
bool sync_due(const AgentState& state, int t, double threshold);

/// T ln(M T) / (d M).
double default_sync_threshold(int horizon, int num_agents, int dim);

}  // namespace disc
