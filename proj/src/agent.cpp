#include "disc/agent.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace disc {

std::string_view to_string(Mode mode) {
  switch (mode) {
    case Mode::KnownBaseline: return "disc-ucb";
    case Mode::UnknownBaseline: return "disc-ucb-ub";
    case Mode::Unconstrained: return "dislinucb";
    case Mode::Independent: return "independent";
  }
  return "unknown";
}

Mode parse_mode(std::string_view name) {
  if (name == "disc-ucb") return Mode::KnownBaseline;
  if (name == "disc-ucb-ub") return Mode::UnknownBaseline;
  if (name == "dislinucb") return Mode::Unconstrained;
  if (name == "independent") return Mode::Independent;
  throw std::invalid_argument("unknown mode '" + std::string(name) +
                              "' (expected disc-ucb, disc-ucb-ub, dislinucb or independent)");
}

bool is_constrained(Mode mode) { return mode != Mode::Unconstrained; }

double default_rho(Mode mode, double alpha, double r_l, double r_h) {
  switch (mode) {
    case Mode::UnknownBaseline: return 0.99 * alpha * r_l / 2.0;
    case Mode::Unconstrained: return 0.0;
    case Mode::KnownBaseline:
    case Mode::Independent: return alpha * r_l / (1.0 + r_h);
  }
  return 0.0;
}

void check_rho(const AgentParams& p) {
  if (!is_constrained(p.mode)) return;
  const double upper = p.mode == Mode::UnknownBaseline ? p.alpha * p.r_l / 2.0 : p.alpha * p.r_l / (1.0 + p.r_h);
  const bool open_top = p.mode == Mode::UnknownBaseline;
  const bool ok = p.rho > 0.0 && (open_top ? p.rho < upper : p.rho <= upper * (1.0 + 1e-12));
  if (!ok) {
    throw std::invalid_argument("rho = " + std::to_string(p.rho) + " is outside the safe range (0, " +
                                std::to_string(upper) + (open_top ? ")" : "]") + " for mode " +
                                std::string(to_string(p.mode)));
  }
}

AgentState AgentState::fresh(int id, int dim, const AgentParams& params) {
  if (params.lambda <= 0.0) throw std::invalid_argument("lambda must be positive");
  AgentState s;
  s.id = id;
  s.params = params;
  s.w_loc = SymPsd::zero(dim);
  s.w_syn = SymPsd::zero(dim);
  s.u_loc = Eigen::VectorXd::Zero(dim);
  s.u_syn = Eigen::VectorXd::Zero(dim);
  s.t_last = 0;
  s.logdet_v_last = dim * std::log(params.lambda);
  return s;
}

SymPsd AgentState::gram() const { return (w_syn + w_loc).shifted(params.lambda); }

double confidence_radius(const SymPsd& v_bar, double lambda, double sigma, double delta, int dim) {
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("confidence_radius: delta must lie in (0, 1)");
  if (lambda <= 0.0) throw std::invalid_argument("confidence_radius: lambda must be positive");
  const double noise = std::sqrt(1.0 + sigma * sigma);
  const double half_log_ratio = 0.5 * (logdet(v_bar) - dim * std::log(lambda));
  const double log_term = half_log_ratio + std::log(2.0 / delta);
  return noise * std::sqrt(2.0 * log_term) + std::sqrt(lambda);
}

Eigen::VectorXd estimate(const AgentState& state) { return solve_psd(state.gram(), state.u_syn + state.u_loc); }

double ucb_value(const Eigen::VectorXd& psi, const Eigen::VectorXd& theta_hat, double beta, const SymPsd& v_bar) {
  return psi.dot(theta_hat) + beta * mahalanobis_inv_norm(psi, v_bar);
}

double ucb_value(const Eigen::VectorXd& psi, const Eigen::VectorXd& theta_hat, double beta,
                 const PsdFactor<double>& v_bar) {
  return psi.dot(theta_hat) + beta * v_bar.inv_norm(psi);
}

bool in_confidence_set(const Eigen::VectorXd& theta, const Eigen::VectorXd& theta_hat, double beta,
                       const SymPsd& v_bar) {
  const Eigen::VectorXd diff = theta - theta_hat;
  return std::sqrt(diff.dot(v_bar.matrix() * diff)) <= beta;
}

namespace {

PruneResult prune_at(const Eigen::MatrixXd& psis, const Eigen::VectorXd& theta_hat, double threshold) {
  PruneResult out;
  out.threshold = threshold;
  const Eigen::VectorXd estimated = psis * theta_hat;
  for (Eigen::Index x = 0; x < estimated.size(); ++x) {
    if (estimated(x) >= threshold) out.actions.push_back(static_cast<int>(x));
  }
  return out;
}

double margin(double beta, double lambda_min) {
  if (lambda_min <= 0.0) throw std::invalid_argument("pruning requires lambda_min > 0");
  return beta / std::sqrt(lambda_min);
}

}  // namespace

PruneResult prune_known(const Eigen::MatrixXd& psis, const Eigen::VectorXd& theta_hat, double beta, double lambda_min,
                        double alpha, double r_b) {
  return prune_at(psis, theta_hat, margin(beta, lambda_min) + (1.0 - alpha) * r_b);
}

PruneResult prune_unknown(const Eigen::MatrixXd& psis, const Eigen::VectorXd& psi_b, const Eigen::VectorXd& theta_hat,
                          double beta, const SymPsd& v_bar, double lambda_min, double alpha) {
  const double baseline_ucb = ucb_value(psi_b, theta_hat, beta, v_bar);
  return prune_at(psis, theta_hat, margin(beta, lambda_min) + (1.0 - alpha) * baseline_ucb);
}

double gate_threshold(double beta, double alpha, double reward_bound, Mode mode) {
  if (!is_constrained(mode)) return 0.0;
  if (!(alpha > 0.0)) throw std::invalid_argument("gate: alpha must be positive");
  if (!(reward_bound > 0.0)) return std::numeric_limits<double>::infinity();
  const double numerator = mode == Mode::UnknownBaseline ? 2.0 * (2.0 - alpha) * beta : 2.0 * beta;
  const double root = numerator / (alpha * reward_bound);
  return root * root;
}

bool gate(double beta, double lambda_min, double alpha, double reward_bound, Mode mode) {
  return lambda_min >= gate_threshold(beta, alpha, reward_bound, mode);
}

ConservativeVector conservative_vector(const Eigen::VectorXd& psi_b, double rho, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::VectorXd zeta(psi_b.size());
  double norm = 0.0;
  do {
    for (Eigen::Index k = 0; k < zeta.size(); ++k) zeta(k) = normal(rng);
    norm = zeta.norm();
  } while (norm == 0.0);
  zeta /= norm;
  return {(1.0 - rho) * psi_b + rho * zeta, std::move(zeta)};
}

int Decision::action() const {
  if (const auto* a = std::get_if<AgentAction>(&kind)) return a->action;
  return -1;
}

const Eigen::VectorXd& Decision::psi() const {
  if (const auto* a = std::get_if<AgentAction>(&kind)) return a->psi;
  return std::get<Conservative>(kind).psi;
}

namespace {

int argmax_ucb(const Eigen::MatrixXd& psis, const std::vector<int>& candidates, const Eigen::VectorXd& theta_hat,
               double beta, const PsdFactor<double>& factor) {
  int best = -1;
  double best_value = -std::numeric_limits<double>::infinity();
  for (int x : candidates) {
    const double value = ucb_value(psis.row(x).transpose(), theta_hat, beta, factor);
    if (value > best_value) {
      best_value = value;
      best = x;
    }
  }
  return best;
}

}  // namespace

Decision select(const AgentState& state, const Eigen::MatrixXd& psis, const BaselineInfo& baseline, Rng& rng) {
  if (psis.rows() == 0) throw std::invalid_argument("select: empty action set");
  const AgentParams& p = state.params;
  const SymPsd v_bar = state.gram();
  const PsdFactor<double> factor(v_bar);

  Decision out;
  Diagnostics& diag = out.diag;
  diag.theta_hat = factor.solve(state.u_syn + state.u_loc);
  diag.beta = confidence_radius(v_bar, p.lambda, p.sigma, p.delta, state.dim());
  diag.lambda_min = min_eigenvalue(v_bar);

  if (!is_constrained(p.mode)) {
    diag.pruned.resize(static_cast<std::size_t>(psis.rows()));
    for (int x = 0; x < psis.rows(); ++x) diag.pruned[static_cast<std::size_t>(x)] = x;
    diag.gate_passed = true;
    const int x = argmax_ucb(psis, diag.pruned, diag.theta_hat, diag.beta, factor);
    out.kind = AgentAction{x, psis.row(x).transpose()};
    return out;
  }

  const Eigen::VectorXd psi_b = psis.row(baseline.action).transpose();
  PruneResult pruned;
  double reward_bound = 0.0;
  if (p.mode == Mode::UnknownBaseline) {
    const double baseline_ucb = ucb_value(psi_b, diag.theta_hat, diag.beta, factor);
    pruned = prune_at(psis, diag.theta_hat, margin(diag.beta, diag.lambda_min) + (1.0 - p.alpha) * baseline_ucb);
    reward_bound = p.r_l;
  } else {
    pruned = prune_known(psis, diag.theta_hat, diag.beta, diag.lambda_min, p.alpha, baseline.reward);
    reward_bound = baseline.reward;
  }
  diag.prune_threshold = pruned.threshold;
  diag.pruned = std::move(pruned.actions);
  diag.gate_threshold = gate_threshold(diag.beta, p.alpha, reward_bound, p.mode);
  diag.gate_passed = diag.lambda_min >= diag.gate_threshold;

  if (!diag.pruned.empty() && diag.gate_passed) {
    const int x = argmax_ucb(psis, diag.pruned, diag.theta_hat, diag.beta, factor);
    out.kind = AgentAction{x, psis.row(x).transpose()};
  } else {
    auto cons = conservative_vector(psi_b, p.rho, rng);
    out.kind = Conservative{baseline.action, std::move(cons.psi), std::move(cons.zeta)};
  }
  return out;
}

void local_update(AgentState& state, const Eigen::VectorXd& psi, double y) {
  state.w_loc.add_outer(psi);
  state.u_loc += psi * y;
}

bool sync_due(const AgentState& state, int t, double threshold) {
  if (std::isinf(threshold) && threshold > 0.0) return false;
  const double growth = logdet(state.gram()) - state.logdet_v_last;
  return growth * static_cast<double>(t - state.t_last) >= threshold;
}

double default_sync_threshold(int horizon, int num_agents, int dim) {
  const double mt = static_cast<double>(num_agents) * horizon;
  return horizon * std::log(mt) / (static_cast<double>(dim) * num_agents);
}

}  // namespace disc
