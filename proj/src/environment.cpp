#include "disc/environment.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <stdexcept>

namespace disc {

ContextDistribution ContextDistribution::point_mass(int context) { return {{context}, {1.0}}; }

ContextDistribution ContextDistribution::uniform(int num_contexts) {
  ContextDistribution mu;
  mu.support.resize(static_cast<std::size_t>(num_contexts));
  std::iota(mu.support.begin(), mu.support.end(), 0);
  mu.probs.assign(static_cast<std::size_t>(num_contexts), 1.0 / num_contexts);
  return mu;
}

std::vector<std::string> validate(const ContextDistribution& mu, int num_contexts) {
  std::vector<std::string> errors;
  if (mu.support.empty()) errors.emplace_back("context distribution has empty support");
  if (mu.support.size() != mu.probs.size()) errors.emplace_back("support and probabilities differ in length");
  double total = 0.0;
  for (double p : mu.probs) {
    if (!(p >= 0.0)) errors.emplace_back("negative or NaN probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) errors.push_back("probabilities sum to " + std::to_string(total));
  for (int c : mu.support) {
    if (c < 0 || c >= num_contexts) errors.push_back("context id " + std::to_string(c) + " out of range");
  }
  return errors;
}

Environment::Environment(TaskSpec tasks, std::vector<Table> tables, Eigen::VectorXd theta_star, double noise_sigma,
                         int baseline_rank)
    : tasks_(std::move(tasks)),
      tables_(std::move(tables)),
      theta_star_(std::move(theta_star)),
      noise_sigma_(noise_sigma),
      baseline_rank_(baseline_rank) {
  require_valid(tasks_);
  if (static_cast<int>(tables_.size()) != tasks_.num_agents()) {
    throw std::invalid_argument("Environment: one feature table per agent is required");
  }
  if (tables_.front().empty()) throw std::invalid_argument("Environment: at least one context is required");
  const auto contexts = tables_.front().size();
  const auto actions = tables_.front().front().rows();
  if (actions <= 0) throw std::invalid_argument("Environment: at least one action is required");
  for (const auto& table : tables_) {
    if (table.size() != contexts) throw std::invalid_argument("Environment: context count differs across agents");
    for (const auto& m : table) {
      if (m.rows() != actions || m.cols() != tasks_.dim) {
        throw std::invalid_argument("Environment: feature table has wrong shape");
      }
    }
  }
  if (theta_star_.size() != tasks_.dim) throw std::invalid_argument("Environment: theta* dimension mismatch");
  if (noise_sigma_ < 0.0) throw std::invalid_argument("Environment: noise sigma must be nonnegative");
  if (baseline_rank_ < 1 || baseline_rank_ > actions) {
    throw std::invalid_argument("Environment: baseline rank must lie in 1..K");
  }
}

std::vector<std::string> Environment::check_invariants(double tol) const {
  std::vector<std::string> errors;
  if (theta_star_.norm() > 1.0 + tol) errors.emplace_back("||theta*|| exceeds 1");
  for (int i = 0; i < num_agents(); ++i) {
    const Eigen::VectorXd mask = coordinate_mask(tasks_, i);
    for (int c = 0; c < num_contexts(); ++c) {
      const auto& m = features(i, c);
      const Eigen::VectorXd rewards = m * theta_star_;
      for (int x = 0; x < num_actions(); ++x) {
        const std::string where =
            "agent " + std::to_string(i) + ", action " + std::to_string(x) + ", context " + std::to_string(c);
        if (m.row(x).norm() > 1.0 + tol) errors.push_back(where + ": ||phi|| exceeds 1");
        if (rewards(x) < -tol || rewards(x) > 1.0 + tol) errors.push_back(where + ": reward outside [0, 1]");
        if ((m.row(x).transpose().array() * (1.0 - mask.array())).abs().maxCoeff() > 0.0) {
          errors.push_back(where + ": nonzero feature outside the agent's index set");
        }
      }
    }
  }
  return errors;
}

Environment Environment::agent_slice(int agent) const {
  TaskSpec single;
  single.dim = tasks_.dim;
  single.index_sets = {tasks_.index_sets.at(static_cast<std::size_t>(agent))};
  // a single agent with a partial index set would fail the "agent 1 owns all" rule;
  // the slice keeps the table (zeros outside the set) but declares the full set
  single.index_sets.front().resize(static_cast<std::size_t>(tasks_.dim));
  std::iota(single.index_sets.front().begin(), single.index_sets.front().end(), 0);
  return Environment(single, {tables_.at(static_cast<std::size_t>(agent))}, theta_star_, noise_sigma_, baseline_rank_);
}

Eigen::MatrixXd expected_features(const Environment& env, int agent, const ContextDistribution& mu) {
  Eigen::MatrixXd psi = Eigen::MatrixXd::Zero(env.num_actions(), env.dim());
  for (std::size_t s = 0; s < mu.support.size(); ++s) {
    psi.noalias() += mu.probs[s] * env.features(agent, mu.support[s]);
  }
  return psi;
}

int sample_context(const ContextDistribution& mu, Rng& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double u = unit(rng);
  double acc = 0.0;
  for (std::size_t s = 0; s < mu.support.size(); ++s) {
    acc += mu.probs[s];
    if (u < acc) return mu.support[s];
  }
  // u landed in the rounding gap above the cumulative sum
  for (std::size_t s = mu.support.size(); s-- > 0;) {
    if (mu.probs[s] > 0.0) return mu.support[s];
  }
  return mu.support.back();
}

double realize_reward(const Environment& env, const Eigen::VectorXd& feature, Rng& rng) {
  std::normal_distribution<double> noise(0.0, 1.0);
  const double eta = noise(rng);
  return feature.dot(env.theta_star()) + env.noise_sigma() * eta;
}

namespace {

std::vector<int> rank_actions(const Eigen::VectorXd& rewards) {
  std::vector<int> order(static_cast<std::size_t>(rewards.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return rewards(a) > rewards(b); });
  return order;
}

}  // namespace

BaselineInfo baseline_for_round(const Environment& env, const Eigen::MatrixXd& psis) {
  const Eigen::VectorXd rewards = psis * env.theta_star();
  const auto order = rank_actions(rewards);
  const int x_b = order.at(static_cast<std::size_t>(env.baseline_rank() - 1));
  return {x_b, rewards(x_b)};
}

BaselineInfo baseline_for_round(const Environment& env, int agent, const ContextDistribution& mu) {
  return baseline_for_round(env, expected_features(env, agent, mu));
}

ActionValue optimal_action(const Environment& env, const Eigen::MatrixXd& psis) {
  const Eigen::VectorXd rewards = psis * env.theta_star();
  Eigen::Index best = 0;
  for (Eigen::Index x = 1; x < rewards.size(); ++x) {
    if (rewards(x) > rewards(best)) best = x;
  }
  return {static_cast<int>(best), rewards(best)};
}

ActionValue optimal_action(const Environment& env, int agent, const ContextDistribution& mu) {
  return optimal_action(env, expected_features(env, agent, mu));
}

bool check_violation(const Environment& env, const Eigen::VectorXd& feature, double r_b, double alpha) {
  return feature.dot(env.theta_star()) < (1.0 - alpha) * r_b - 1e-12;
}

std::vector<ContextDistribution> make_schedule(int num_contexts, int rounds, const ScheduleParams& params, Rng& rng) {
  if (num_contexts <= 0) throw std::invalid_argument("make_schedule: no contexts");
  std::vector<ContextDistribution> schedule;
  schedule.reserve(static_cast<std::size_t>(rounds));
  if (params.law == ContextLaw::FixedUniform) {
    schedule.assign(static_cast<std::size_t>(rounds), ContextDistribution::uniform(num_contexts));
    return schedule;
  }
  if (params.support_size < 1) throw std::invalid_argument("make_schedule: support size must be positive");
  const int k = std::min(params.support_size, num_contexts);
  std::vector<int> ids(static_cast<std::size_t>(num_contexts));
  std::exponential_distribution<double> gamma1(1.0);
  for (int t = 0; t < rounds; ++t) {
    std::iota(ids.begin(), ids.end(), 0);
    // partial Fisher-Yates: first k entries become a uniform random subset
    for (int j = 0; j < k; ++j) {
      std::uniform_int_distribution<int> pick(j, num_contexts - 1);
      std::swap(ids[static_cast<std::size_t>(j)], ids[static_cast<std::size_t>(pick(rng))]);
    }
    ContextDistribution mu;
    mu.support.assign(ids.begin(), ids.begin() + k);
    std::sort(mu.support.begin(), mu.support.end());
    // Dirichlet(1, ..., 1) as normalized Exp(1) draws
    mu.probs.resize(static_cast<std::size_t>(k));
    double total = 0.0;
    for (auto& p : mu.probs) {
      p = gamma1(rng);
      total += p;
    }
    for (auto& p : mu.probs) p /= total;
    schedule.push_back(std::move(mu));
  }
  return schedule;
}

RewardBounds scan_reward_bounds(const Environment& env, int agent, const std::vector<ContextDistribution>& schedule) {
  RewardBounds b;
  bool first = true;
  for (const auto& mu : schedule) {
    const Eigen::MatrixXd psis = expected_features(env, agent, mu);
    const auto base = baseline_for_round(env, psis);
    const auto best = optimal_action(env, psis);
    const double kappa = best.reward - base.reward;
    if (first) {
      b = {base.reward, base.reward, kappa, kappa};
      first = false;
    } else {
      b.r_l = std::min(b.r_l, base.reward);
      b.r_h = std::max(b.r_h, base.reward);
      b.kappa_l = std::min(b.kappa_l, kappa);
      b.kappa_h = std::max(b.kappa_h, kappa);
    }
  }
  return b;
}

namespace {

constexpr int kMaxRegenerations = 10000;

void rescale_tables(std::vector<Environment::Table>& tables, const Eigen::VectorXd& theta) {
  double scale = 1.0;
  for (const auto& table : tables) {
    for (const auto& m : table) {
      scale = std::max(scale, m.rowwise().norm().maxCoeff());
      scale = std::max(scale, (m * theta).maxCoeff());
    }
  }
  for (auto& table : tables) {
    for (auto& m : table) m /= scale;
  }
}

}  // namespace

Environment synth_generate(const SynthParams& params, const TaskSpec& tasks, Rng& rng) {
  require_valid(tasks);
  const int d = tasks.dim;
  if (params.theta_star.size() != d) throw std::invalid_argument("synth_generate: theta* dimension mismatch");
  if (params.theta_star.norm() == 0.0) {
    throw std::invalid_argument("synth_generate: theta* is zero, rewards cannot be normalized into [0, 1]");
  }
  if (params.num_actions < 1 || params.num_contexts < 1) {
    throw std::invalid_argument("synth_generate: need at least one action and one context");
  }
  if (params.context_spread < 0.0) throw std::invalid_argument("synth_generate: context spread must be >= 0");

  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Environment::Table> tables;
  tables.reserve(static_cast<std::size_t>(tasks.num_agents()));

  for (int i = 0; i < tasks.num_agents(); ++i) {
    const int local = tasks.local_dim(i);
    const Eigen::VectorXd theta_local = restrict_parameter(params.theta_star, tasks, i);
    Environment::Table table(static_cast<std::size_t>(params.num_contexts), Eigen::MatrixXd(params.num_actions, d));
    for (int x = 0; x < params.num_actions; ++x) {
      int attempt = 0;
      for (;; ++attempt) {
        if (attempt == kMaxRegenerations) {
          throw std::runtime_error("synth_generate: could not draw nonnegative rewards for agent " +
                                   std::to_string(i) + ", action " + std::to_string(x));
        }
        Eigen::VectorXd base(local);
        for (int k = 0; k < local; ++k) base(k) = normal(rng);
        if (base.dot(theta_local) < 0.0) base = -base;
        bool ok = true;
        std::vector<Eigen::VectorXd> rows;
        rows.reserve(static_cast<std::size_t>(params.num_contexts));
        for (int c = 0; c < params.num_contexts; ++c) {
          Eigen::VectorXd phi = base;
          for (int k = 0; k < local; ++k) phi(k) += params.context_spread * normal(rng);
          if (phi.dot(theta_local) < 0.0) ok = false;
          rows.push_back(std::move(phi));
        }
        if (!ok) continue;
        for (int c = 0; c < params.num_contexts; ++c) {
          table[static_cast<std::size_t>(c)].row(x) = lift_feature(rows[static_cast<std::size_t>(c)], tasks, i).transpose();
        }
        break;
      }
    }
    tables.push_back(std::move(table));
  }

  rescale_tables(tables, params.theta_star);
  return Environment(tasks, std::move(tables), params.theta_star, params.noise_sigma, params.baseline_rank);
}

Environment from_feature_table(const Environment::Table& table, const TaskSpec& tasks, const Eigen::VectorXd& theta_star,
                               double noise_sigma, int baseline_rank) {
  require_valid(tasks);
  if (table.empty()) throw std::invalid_argument("from_feature_table: empty feature table");
  std::vector<Environment::Table> tables;
  for (int i = 0; i < tasks.num_agents(); ++i) {
    const Eigen::RowVectorXd mask = coordinate_mask(tasks, i).transpose();
    Environment::Table masked;
    masked.reserve(table.size());
    for (const auto& m : table) {
      if (m.cols() != tasks.dim) {
        throw std::invalid_argument("from_feature_table: feature dimension " + std::to_string(m.cols()) +
                                    " does not match task dimension " + std::to_string(tasks.dim));
      }
      masked.push_back(m.array().rowwise() * mask.array());
      if ((masked.back() * theta_star).minCoeff() < -1e-12) {
        throw std::invalid_argument("from_feature_table: negative expected reward; theta* must keep rewards >= 0");
      }
    }
    tables.push_back(std::move(masked));
  }
  rescale_tables(tables, theta_star);
  return Environment(tasks, std::move(tables), theta_star, noise_sigma, baseline_rank);
}

void write_feature_csv(const Environment& env, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out.precision(9);
  out << "agent,action,context";
  for (int k = 0; k < env.dim(); ++k) out << ",f" << (k + 1);
  out << '\n';
  for (int i = 0; i < env.num_agents(); ++i) {
    for (int x = 0; x < env.num_actions(); ++x) {
      for (int c = 0; c < env.num_contexts(); ++c) {
        out << i << ',' << x << ',' << c;
        const auto& m = env.features(i, c);
        for (int k = 0; k < env.dim(); ++k) out << ',' << m(x, k);
        out << '\n';
      }
    }
  }
  if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace disc
