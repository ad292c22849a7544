#pragma once

#include "disc/agent.hpp"
#include "disc/config.hpp"
#include "disc/coordinator.hpp"
#include "disc/environment.hpp"
#include "disc/tasks.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace disc {

struct EnvConfig {
  std::string source = "synthetic";  // "synthetic" or "features"
  std::string features_path;         // context,action,f1.. table for source = "features"
  int num_actions = 40;
  int num_contexts = 20;
  Eigen::VectorXd theta_star;
  double noise_sigma = 0.05;
  double context_spread = 0.1;
  ScheduleParams schedule;
  bool shared_context = true;  // one realized context per round for all agents
};

struct TaskConfig {
  int dim = 2;
  int num_agents = 1;
  std::vector<std::vector<int>> index_sets;  // 1-based; empty means every agent owns all features
  bool cycle = false;                        // repeat the listed sets over the agents
};

struct RunConfig {
  EnvConfig env;
  TaskConfig tasks;
  int horizon = 1000;
  Mode mode = Mode::KnownBaseline;
  double lambda = 1.0;
  double delta = 1e-3;
  double alpha = 0.3;
  std::optional<double> sigma;  // noise level in the confidence radius; defaults to env noise
  int baseline_rank = 10;
  std::optional<double> rho;
  std::optional<double> sync_threshold;
  int trials = 1;
  std::uint64_t seed = 1;
  std::string output = "results";

  TaskSpec task_spec() const;
  /// +inf in independent mode, otherwise the override or T ln(MT) / (dM).
  double resolved_sync_threshold() const;
  double radius_sigma() const { return sigma.value_or(env.noise_sigma); }
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Maps sections [env] [tasks] [constraint] [algo] [run]; unknown sections or keys are errors.
RunConfig config_from_document(const config::Document& doc);
using Override = std::pair<std::string, std::string>;
/// Parses the file, applies `overrides` in order, then maps and validates. A relative
/// features path is resolved against the config file's directory.
RunConfig load_config(const std::string& path, const std::vector<Override>& overrides = {});

/// Sets one field through its config key, e.g. ("alpha", "0.5"), ("agents", "3"),
/// ("mode", "disc-ucb-ub") or a fully qualified "constraint.alpha".
void apply_override(config::Document& doc, const std::string& key, const std::string& value);

std::vector<std::string> validate(const RunConfig& cfg);

struct RoundRecord {
  int trial = 0;
  int round = 0;  // 1-based
  int agent = 0;  // 0-based
  Mode mode = Mode::KnownBaseline;
  int action = -1;  // -1 for conservative plays
  bool conservative = false;
  int baseline_action = -1;
  double expected_reward = 0.0;  // psi_played^T theta*
  double realized_reward = 0.0;  // noisy y
  double baseline_reward = 0.0;  // r_b
  double instant_regret = 0.0;
  double cum_expected_regret = 0.0;
  double cum_realized_regret = 0.0;
  bool violation = false;
  int cum_violations = 0;
  int cum_conservative = 0;
  std::int64_t sync_epochs = 0;
  std::int64_t comm_scalars = 0;
  double beta = 0.0;
  double lambda_min = 0.0;
};

/// Environment, per-round context distributions and per-agent reward bounds of one trial.
struct TrialSetup {
  Environment env;
  std::vector<ContextDistribution> schedule;
  std::vector<RewardBounds> bounds;
};

TrialSetup prepare_trial(const RunConfig& cfg, int trial);

/// Harness hook, called for every agent-round after selection and before the update.
struct RoundTrace {
  int trial;
  int round;
  int agent;
  const AgentState& state;
  const Decision& decision;
  const Eigen::MatrixXd& psis;
  BaselineInfo baseline;
  ActionValue optimal;
  int context;
};
using Observer = std::function<void(const RoundTrace&)>;

struct TrialResult {
  std::vector<RoundRecord> records;  // round-major, agents in id order within a round
  CommLedger ledger;
  std::vector<RewardBounds> bounds;
  std::vector<double> rho;
  std::vector<AgentState> final_states;
};

/// Runs the round loop on a prepared setup. `agent_streams` picks which per-agent random
/// streams each agent uses (defaults to 0..M-1).
TrialResult simulate(const RunConfig& cfg, const TrialSetup& setup, int trial, std::vector<int> agent_streams = {},
                     const Observer& observer = {});

TrialResult run_trial(const RunConfig& cfg, int trial, const Observer& observer = {});

struct SummaryRow {
  int round = 0;
  double cum_expected_regret = 0.0;  // summed over agents, mean over trials
  double cum_expected_regret_per_agent = 0.0;
  double cum_realized_regret = 0.0;
  double cum_violations = 0.0;
  double cum_conservative = 0.0;
  double expected_reward = 0.0;  // mean over agents and trials
  double baseline_reward = 0.0;
  double reward_floor = 0.0;  // (1 - alpha) r_b
  double sync_epochs = 0.0;
  double comm_scalars = 0.0;
};

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, int horizon, int num_agents, double alpha);

struct ExperimentResult {
  RunConfig config;
  std::vector<TrialResult> trials;
  std::vector<SummaryRow> summary;
};

/// Runs every trial (in parallel when `threads` > 1) and aggregates. Results do not
/// depend on the thread count.
ExperimentResult run_experiment(const RunConfig& cfg, unsigned threads = 0);

struct SweepEntry {
  std::string label;
  RunConfig config;
};

/// Runs each entry with the same master seed. Horizons must agree.
std::vector<ExperimentResult> compare_modes(const std::vector<SweepEntry>& entries, unsigned threads = 0);

void write_records_csv(std::ostream& out, const std::vector<TrialResult>& trials, const std::string& sweep_id = "",
                       bool header = true);
void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, const std::string& sweep_id = "",
                       bool header = true);

/// Writes <dir>/rounds.csv and <dir>/summary.csv.
void write_experiment(const ExperimentResult& result, const std::string& dir);
/// Writes <dir>/sweep_rounds.csv and <dir>/sweep_summary.csv with a leading sweep_id column.
void write_sweep(const std::vector<SweepEntry>& entries, const std::vector<ExperimentResult>& results,
                 const std::string& dir);

}  // namespace disc
