#include "disc/experiment.hpp"

#include "disc/data_ingest.hpp"
#include "disc/seeding.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <iomanip>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <thread>

namespace disc {

// ---------------------------------------------------------------------------
// configuration

TaskSpec RunConfig::task_spec() const {
  if (tasks.index_sets.empty()) return TaskSpec::shared(tasks.dim, tasks.num_agents);
  std::vector<std::vector<int>> sets;
  if (tasks.cycle) {
    for (int i = 0; i < tasks.num_agents; ++i) sets.push_back(tasks.index_sets[static_cast<std::size_t>(i) % tasks.index_sets.size()]);
    // keep d_1 >= d_2 >= ... after cycling
    std::stable_sort(sets.begin(), sets.end(), [](const auto& a, const auto& b) { return a.size() > b.size(); });
  } else {
    sets = tasks.index_sets;
  }
  return TaskSpec::from_one_based(tasks.dim, sets);
}

double RunConfig::resolved_sync_threshold() const {
  if (mode == Mode::Independent) return std::numeric_limits<double>::infinity();
  if (sync_threshold) return *sync_threshold;
  return default_sync_threshold(horizon, tasks.num_agents, tasks.dim);
}

namespace {

using config::Document;
using config::Section;
using config::Value;

const std::map<std::string, std::set<std::string>>& known_keys() {
  static const std::map<std::string, std::set<std::string>> keys = {
      {"env",
       {"source", "features", "actions", "contexts", "theta_star", "noise_sigma", "context_spread", "context_law",
        "support_size", "shared_context"}},
      {"tasks", {"dim", "agents", "index_sets", "assign"}},
      {"constraint", {"alpha", "baseline_rank", "rho"}},
      {"algo", {"mode", "lambda", "delta", "sigma", "sync_threshold"}},
      {"run", {"horizon", "trials", "seed", "output"}},
  };
  return keys;
}

const std::map<std::string, std::string>& short_keys() {
  static const std::map<std::string, std::string> aliases = {
      {"alpha", "constraint.alpha"}, {"M", "tasks.agents"},       {"agents", "tasks.agents"},
      {"mode", "algo.mode"},         {"lambda", "algo.lambda"},    {"delta", "algo.delta"},
      {"rho", "constraint.rho"},     {"horizon", "run.horizon"},   {"T", "run.horizon"},
      {"seed", "run.seed"},          {"trials", "run.trials"},     {"baseline_rank", "constraint.baseline_rank"},
  };
  return aliases;
}

}  // namespace

RunConfig config_from_document(const Document& doc) {
  RunConfig cfg;
  try {
    for (const auto& [name, section] : doc) {
      const auto known = known_keys().find(name);
      if (known == known_keys().end()) throw ConfigError("unknown section [" + name + "]");
      for (const auto& [key, value] : section) {
        if (!known->second.count(key)) throw ConfigError("unknown key '" + key + "' in [" + name + "]");
      }
    }
    auto get = [&](const char* sec, const char* key) -> const Value* {
      const auto s = doc.find(sec);
      if (s == doc.end()) return nullptr;
      const auto v = s->second.find(key);
      return v == s->second.end() ? nullptr : &v->second;
    };

    if (auto v = get("env", "source")) cfg.env.source = v->as_string("source");
    if (auto v = get("env", "features")) cfg.env.features_path = v->as_string("features");
    if (auto v = get("env", "actions")) cfg.env.num_actions = v->as_int("actions");
    if (auto v = get("env", "contexts")) cfg.env.num_contexts = v->as_int("contexts");
    if (auto v = get("env", "theta_star")) {
      const auto xs = v->as_numbers("theta_star");
      cfg.env.theta_star = Eigen::Map<const Eigen::VectorXd>(xs.data(), static_cast<Eigen::Index>(xs.size()));
    }
    if (auto v = get("env", "noise_sigma")) cfg.env.noise_sigma = v->as_number("noise_sigma");
    if (auto v = get("env", "context_spread")) cfg.env.context_spread = v->as_number("context_spread");
    if (auto v = get("env", "context_law")) {
      const auto& law = v->as_string("context_law");
      if (law == "random-support") {
        cfg.env.schedule.law = ContextLaw::RandomSupport;
      } else if (law == "fixed-uniform") {
        cfg.env.schedule.law = ContextLaw::FixedUniform;
      } else {
        throw ConfigError("context_law must be \"random-support\" or \"fixed-uniform\"");
      }
    }
    if (auto v = get("env", "support_size")) cfg.env.schedule.support_size = v->as_int("support_size");
    if (auto v = get("env", "shared_context")) cfg.env.shared_context = v->as_bool("shared_context");

    if (auto v = get("tasks", "dim")) cfg.tasks.dim = v->as_int("dim");
    if (auto v = get("tasks", "agents")) cfg.tasks.num_agents = v->as_int("agents");
    if (auto v = get("tasks", "index_sets")) cfg.tasks.index_sets = v->as_int_lists("index_sets");
    if (auto v = get("tasks", "assign")) {
      const auto& assign = v->as_string("assign");
      if (assign != "explicit" && assign != "cycle") throw ConfigError("assign must be \"explicit\" or \"cycle\"");
      cfg.tasks.cycle = assign == "cycle";
    }

    if (auto v = get("constraint", "alpha")) cfg.alpha = v->as_number("alpha");
    if (auto v = get("constraint", "baseline_rank")) cfg.baseline_rank = v->as_int("baseline_rank");
    if (auto v = get("constraint", "rho")) cfg.rho = v->as_number("rho");

    if (auto v = get("algo", "mode")) cfg.mode = parse_mode(v->as_string("mode"));
    if (auto v = get("algo", "lambda")) cfg.lambda = v->as_number("lambda");
    if (auto v = get("algo", "delta")) cfg.delta = v->as_number("delta");
    if (auto v = get("algo", "sigma")) cfg.sigma = v->as_number("sigma");
    if (auto v = get("algo", "sync_threshold")) cfg.sync_threshold = v->as_number("sync_threshold");

    if (auto v = get("run", "horizon")) cfg.horizon = v->as_int("horizon");
    if (auto v = get("run", "trials")) cfg.trials = v->as_int("trials");
    if (auto v = get("run", "seed")) {
      const double s = v->as_number("seed");
      if (s < 0 || s != std::floor(s)) throw ConfigError("seed must be a nonnegative integer");
      cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (auto v = get("run", "output")) cfg.output = v->as_string("output");
  } catch (const config::ParseError& e) {
    throw ConfigError(e.what());
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }

  if (cfg.env.theta_star.size() == 0) throw ConfigError("[env] theta_star is required");
  const auto errors = validate(cfg);
  if (!errors.empty()) {
    std::string msg = "invalid config:";
    for (const auto& e : errors) msg += "\n  " + e;
    throw ConfigError(msg);
  }
  return cfg;
}

RunConfig load_config(const std::string& path, const std::vector<Override>& overrides) {
  try {
    auto doc = config::parse_file(path);
    for (const auto& [key, value] : overrides) apply_override(doc, key, value);
    RunConfig cfg = config_from_document(doc);
    if (cfg.env.source == "features" && !cfg.env.features_path.empty()) {
      const std::filesystem::path p(cfg.env.features_path);
      if (p.is_relative()) cfg.env.features_path = (std::filesystem::path(path).parent_path() / p).string();
    }
    return cfg;
  } catch (const config::ParseError& e) {
    throw ConfigError(e.what());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

void apply_override(Document& doc, const std::string& key, const std::string& value) {
  std::string qualified = key;
  if (const auto alias = short_keys().find(key); alias != short_keys().end()) qualified = alias->second;
  const auto dot = qualified.find('.');
  if (dot == std::string::npos) throw ConfigError("cannot vary '" + key + "': use section.key");
  const std::string section = qualified.substr(0, dot);
  const std::string name = qualified.substr(dot + 1);
  Value v;
  try {
    v = config::parse_value(value);
  } catch (const config::ParseError&) {
    // bare words such as disc-ucb are strings
    v.kind = Value::Kind::String;
    v.text = value;
  }
  doc[section][name] = v;
}

std::vector<std::string> validate(const RunConfig& cfg) {
  std::vector<std::string> errors;
  if (cfg.horizon < 1) errors.emplace_back("horizon must be >= 1");
  if (cfg.trials < 1) errors.emplace_back("trials must be >= 1");
  if (cfg.tasks.num_agents < 1) errors.emplace_back("agents must be >= 1");
  if (cfg.tasks.dim < 1) errors.emplace_back("dim must be >= 1");
  if (!(cfg.lambda > 0.0)) errors.emplace_back("lambda must be positive");
  if (!(cfg.delta > 0.0 && cfg.delta < 1.0)) errors.emplace_back("delta must lie in (0, 1)");
  if (is_constrained(cfg.mode) && !(cfg.alpha > 0.0 && cfg.alpha <= 1.0)) {
    errors.emplace_back("alpha must lie in (0, 1]");
  }
  if (cfg.rho && !(*cfg.rho > 0.0 && *cfg.rho < 1.0)) errors.emplace_back("rho must lie in (0, 1)");
  if (cfg.sigma && *cfg.sigma < 0.0) errors.emplace_back("sigma must be nonnegative");
  if (cfg.sync_threshold && !(*cfg.sync_threshold >= 0.0)) errors.emplace_back("sync_threshold must be >= 0");
  if (cfg.env.noise_sigma < 0.0) errors.emplace_back("noise_sigma must be nonnegative");
  if (cfg.env.context_spread < 0.0) errors.emplace_back("context_spread must be nonnegative");
  if (cfg.env.schedule.support_size < 1) errors.emplace_back("support_size must be >= 1");
  if (cfg.env.theta_star.size() != cfg.tasks.dim) {
    errors.push_back("theta_star has " + std::to_string(cfg.env.theta_star.size()) + " entries, dim is " +
                     std::to_string(cfg.tasks.dim));
  } else if (cfg.env.theta_star.norm() > 1.0 + 1e-12) {
    errors.emplace_back("||theta_star|| must be <= 1");
  }
  if (cfg.env.source == "synthetic") {
    if (cfg.env.num_actions < 1) errors.emplace_back("actions must be >= 1");
    if (cfg.env.num_contexts < 1) errors.emplace_back("contexts must be >= 1");
    if (cfg.baseline_rank < 1 || cfg.baseline_rank > cfg.env.num_actions) {
      errors.emplace_back("baseline_rank must lie in 1..actions");
    }
  } else if (cfg.env.source == "features") {
    if (cfg.env.features_path.empty()) errors.emplace_back("source = \"features\" requires [env] features");
    if (cfg.baseline_rank < 1) errors.emplace_back("baseline_rank must be >= 1");
  } else {
    errors.push_back("unknown env source '" + cfg.env.source + "'");
  }
  if (!cfg.tasks.index_sets.empty() && !cfg.tasks.cycle &&
      static_cast<int>(cfg.tasks.index_sets.size()) != cfg.tasks.num_agents) {
    errors.emplace_back("index_sets must list one set per agent (or set assign = \"cycle\")");
  } else if (cfg.tasks.dim >= 1 && cfg.tasks.num_agents >= 1) {
    for (const auto& e : validate(cfg.task_spec())) errors.push_back("tasks: " + e);
  }
  return errors;
}

// ---------------------------------------------------------------------------
// trial loop

TrialSetup prepare_trial(const RunConfig& cfg, int trial) {
  const TaskSpec spec = cfg.task_spec();
  auto env = [&] {
    if (cfg.env.source == "features") {
      return from_feature_table(ingest::read_features_csv(cfg.env.features_path), spec, cfg.env.theta_star,
                                cfg.env.noise_sigma, cfg.baseline_rank);
    }
    SynthParams params;
    params.num_actions = cfg.env.num_actions;
    params.num_contexts = cfg.env.num_contexts;
    params.theta_star = cfg.env.theta_star;
    params.noise_sigma = cfg.env.noise_sigma;
    params.baseline_rank = cfg.baseline_rank;
    params.context_spread = cfg.env.context_spread;
    Rng rng = make_rng(cfg.seed, static_cast<std::uint64_t>(trial), Stream::Environment);
    return synth_generate(params, spec, rng);
  }();
  Rng schedule_rng = make_rng(cfg.seed, static_cast<std::uint64_t>(trial), Stream::Schedule);
  auto schedule = make_schedule(env.num_contexts(), cfg.horizon, cfg.env.schedule, schedule_rng);
  std::vector<RewardBounds> bounds;
  for (int i = 0; i < env.num_agents(); ++i) bounds.push_back(scan_reward_bounds(env, i, schedule));
  return {std::move(env), std::move(schedule), std::move(bounds)};
}

TrialResult simulate(const RunConfig& cfg, const TrialSetup& setup, int trial, std::vector<int> agent_streams,
                     const Observer& observer) {
  const Environment& env = setup.env;
  const int m = env.num_agents();
  const int d = env.dim();
  if (agent_streams.empty()) {
    for (int i = 0; i < m; ++i) agent_streams.push_back(i);
  }
  if (static_cast<int>(agent_streams.size()) != m) throw std::invalid_argument("simulate: one stream id per agent");
  const auto trial_id = static_cast<std::uint64_t>(trial);

  TrialResult result;
  result.bounds = setup.bounds;
  std::vector<AgentState> agents;
  std::vector<Rng> noise_rngs;
  std::vector<Rng> zeta_rngs;
  std::vector<Rng> context_rngs;
  for (int i = 0; i < m; ++i) {
    AgentParams p;
    p.lambda = cfg.lambda;
    p.delta = cfg.delta;
    p.alpha = cfg.alpha;
    p.sigma = cfg.radius_sigma();
    p.mode = cfg.mode;
    p.r_l = setup.bounds[static_cast<std::size_t>(i)].r_l;
    p.r_h = setup.bounds[static_cast<std::size_t>(i)].r_h;
    p.rho = cfg.rho.value_or(default_rho(cfg.mode, cfg.alpha, p.r_l, p.r_h));
    if (is_constrained(cfg.mode)) {
      try {
        check_rho(p);
      } catch (const std::invalid_argument& e) {
        throw std::runtime_error("agent " + std::to_string(i) + ": " + e.what() +
                                 " (r_l = " + std::to_string(p.r_l) + ", r_h = " + std::to_string(p.r_h) + ")");
      }
    }
    result.rho.push_back(p.rho);
    agents.push_back(AgentState::fresh(i, d, p));
    const auto stream = static_cast<std::uint64_t>(agent_streams[static_cast<std::size_t>(i)]);
    noise_rngs.push_back(make_rng(cfg.seed, trial_id, Stream::Noise, stream));
    zeta_rngs.push_back(make_rng(cfg.seed, trial_id, Stream::Zeta, stream));
    context_rngs.push_back(make_rng(cfg.seed, trial_id, Stream::Contexts, stream + 1));
  }
  Rng shared_context_rng = make_rng(cfg.seed, trial_id, Stream::Contexts, 0);

  const double threshold = cfg.resolved_sync_threshold();
  const bool communicates = cfg.mode != Mode::Independent;
  Server server(m, d);

  std::vector<double> cum_regret(static_cast<std::size_t>(m), 0.0);
  std::vector<double> cum_realized(static_cast<std::size_t>(m), 0.0);
  std::vector<int> cum_violations(static_cast<std::size_t>(m), 0);
  std::vector<int> cum_conservative(static_cast<std::size_t>(m), 0);
  result.records.reserve(static_cast<std::size_t>(cfg.horizon) * static_cast<std::size_t>(m));

  for (int t = 1; t <= cfg.horizon; ++t) {
    const ContextDistribution& mu = setup.schedule[static_cast<std::size_t>(t - 1)];
    const int shared_context = cfg.env.shared_context ? sample_context(mu, shared_context_rng) : -1;
    bool sync_requested = false;

    for (int i = 0; i < m; ++i) {
      const auto ui = static_cast<std::size_t>(i);
      AgentState& agent = agents[ui];
      const Eigen::MatrixXd psis = expected_features(env, i, mu);
      const BaselineInfo baseline = baseline_for_round(env, psis);
      const ActionValue best = optimal_action(env, psis);
      const Decision decision = select(agent, psis, baseline, zeta_rngs[ui]);
      const int context = cfg.env.shared_context ? shared_context : sample_context(mu, context_rngs[ui]);

      if (observer) observer(RoundTrace{trial, t, i, agent, decision, psis, baseline, best, context});

      // realized feature under the hidden context; conservative plays mix the baseline's
      // realized feature with the same zeta the agent used
      Eigen::VectorXd realized;
      if (const auto* cons = std::get_if<Conservative>(&decision.kind)) {
        realized = (1.0 - agent.params.rho) * env.feature(i, baseline.action, context) + agent.params.rho * cons->zeta;
      } else {
        realized = env.feature(i, decision.action(), context);
      }
      const double y = realize_reward(env, realized, noise_rngs[ui]);
      const double expected = decision.psi().dot(env.theta_star());
      const bool violation = check_violation(env, realized, baseline.reward, cfg.alpha);

      RoundRecord rec;
      rec.trial = trial;
      rec.round = t;
      rec.agent = i;
      rec.mode = cfg.mode;
      rec.action = decision.action();
      rec.conservative = decision.conservative();
      rec.baseline_action = baseline.action;
      rec.expected_reward = expected;
      rec.realized_reward = y;
      rec.baseline_reward = baseline.reward;
      rec.instant_regret = best.reward - expected;
      cum_regret[ui] += rec.instant_regret;
      cum_realized[ui] += env.feature(i, best.action, context).dot(env.theta_star()) - realized.dot(env.theta_star());
      rec.cum_expected_regret = cum_regret[ui];
      rec.cum_realized_regret = cum_realized[ui];
      rec.violation = violation;
      cum_violations[ui] += violation ? 1 : 0;
      cum_conservative[ui] += rec.conservative ? 1 : 0;
      rec.cum_violations = cum_violations[ui];
      rec.cum_conservative = cum_conservative[ui];
      rec.beta = decision.diag.beta;
      rec.lambda_min = decision.diag.lambda_min;
      result.records.push_back(rec);

      local_update(agent, decision.psi(), y);
      if (communicates && sync_due(agent, t, threshold)) sync_requested = true;
    }

    // barrier: one agent's trigger synchronizes everyone
    if (sync_requested) {
      std::vector<SyncUp> ups;
      ups.reserve(agents.size());
      for (const auto& a : agents) ups.push_back(make_sync_up(a));
      const SyncDown down = server.aggregate(ups);
      for (auto& a : agents) apply_sync(a, down, t);
    }
    const auto& ledger = server.ledger();
    for (int i = 0; i < m; ++i) {
      auto& rec = result.records[result.records.size() - static_cast<std::size_t>(m - i)];
      rec.sync_epochs = ledger.epochs;
      rec.comm_scalars = ledger.total_scalars();
    }
  }
  result.ledger = server.ledger();
  result.final_states = std::move(agents);
  return result;
}

TrialResult run_trial(const RunConfig& cfg, int trial, const Observer& observer) {
  const auto errors = validate(cfg);
  if (!errors.empty()) throw ConfigError("invalid config: " + errors.front());
  return simulate(cfg, prepare_trial(cfg, trial), trial, {}, observer);
}

// ---------------------------------------------------------------------------
// aggregation and output

std::vector<SummaryRow> summarize(const std::vector<TrialResult>& trials, int horizon, int num_agents, double alpha) {
  std::vector<SummaryRow> rows(static_cast<std::size_t>(horizon));
  for (int t = 0; t < horizon; ++t) rows[static_cast<std::size_t>(t)].round = t + 1;
  if (trials.empty()) return rows;
  const double n = static_cast<double>(trials.size());
  const double per_agent = 1.0 / num_agents;
  for (const auto& trial : trials) {
    for (const auto& rec : trial.records) {
      SummaryRow& row = rows[static_cast<std::size_t>(rec.round - 1)];
      row.cum_expected_regret += rec.cum_expected_regret / n;
      row.cum_expected_regret_per_agent += rec.cum_expected_regret * per_agent / n;
      row.cum_realized_regret += rec.cum_realized_regret / n;
      row.cum_violations += rec.cum_violations / n;
      row.cum_conservative += rec.cum_conservative / n;
      row.expected_reward += rec.expected_reward * per_agent / n;
      row.baseline_reward += rec.baseline_reward * per_agent / n;
      row.reward_floor += (1.0 - alpha) * rec.baseline_reward * per_agent / n;
      if (rec.agent == 0) {
        row.sync_epochs += static_cast<double>(rec.sync_epochs) / n;
        row.comm_scalars += static_cast<double>(rec.comm_scalars) / n;
      }
    }
  }
  return rows;
}

ExperimentResult run_experiment(const RunConfig& cfg, unsigned threads) {
  const auto errors = validate(cfg);
  if (!errors.empty()) throw ConfigError("invalid config: " + errors.front());
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(cfg.trials));

  ExperimentResult out;
  out.config = cfg;
  out.trials.resize(static_cast<std::size_t>(cfg.trials));
  if (threads <= 1) {
    for (int k = 0; k < cfg.trials; ++k) out.trials[static_cast<std::size_t>(k)] = run_trial(cfg, k);
  } else {
    // static striping: worker w runs trials w, w + threads, ...
    std::vector<std::future<void>> workers;
    for (unsigned w = 0; w < threads; ++w) {
      workers.push_back(std::async(std::launch::async, [&, w] {
        for (int k = static_cast<int>(w); k < cfg.trials; k += static_cast<int>(threads)) {
          out.trials[static_cast<std::size_t>(k)] = run_trial(cfg, k);
        }
      }));
    }
    for (auto& f : workers) f.get();
  }
  out.summary = summarize(out.trials, cfg.horizon, cfg.tasks.num_agents, cfg.alpha);
  return out;
}

std::vector<ExperimentResult> compare_modes(const std::vector<SweepEntry>& entries, unsigned threads) {
  if (entries.empty()) return {};
  const auto& first = entries.front().config;
  for (const auto& e : entries) {
    if (e.config.horizon != first.horizon) throw ConfigError("sweep entries have mismatched horizons");
    if (e.config.seed != first.seed) throw ConfigError("sweep entries must share the master seed");
  }
  std::vector<ExperimentResult> results;
  results.reserve(entries.size());
  for (const auto& e : entries) results.push_back(run_experiment(e.config, threads));
  return results;
}

namespace {

void write_prefix(std::ostream& out, const std::string& sweep_id) {
  if (!sweep_id.empty()) out << sweep_id << ',';
}

}  // namespace

void write_records_csv(std::ostream& out, const std::vector<TrialResult>& trials, const std::string& sweep_id,
                       bool header) {
  out << std::setprecision(9);
  if (header) {
    if (!sweep_id.empty()) out << "sweep_id,";
    out << "trial,round,agent,mode,action_id,action_type,baseline_action,expected_reward,realized_reward,"
           "baseline_reward,instant_regret,cum_expected_regret,cum_realized_regret,violation,cum_violations,"
           "cum_conservative,sync_epochs,comm_scalars,beta,lambda_min\n";
  }
  for (const auto& trial : trials) {
    for (const auto& r : trial.records) {
      write_prefix(out, sweep_id);
      out << r.trial << ',' << r.round << ',' << r.agent << ',' << to_string(r.mode) << ',' << r.action << ','
          << (r.conservative ? "conservative" : "agent") << ',' << r.baseline_action << ',' << r.expected_reward << ','
          << r.realized_reward << ',' << r.baseline_reward << ',' << r.instant_regret << ',' << r.cum_expected_regret
          << ',' << r.cum_realized_regret << ',' << (r.violation ? 1 : 0) << ',' << r.cum_violations << ','
          << r.cum_conservative << ',' << r.sync_epochs << ',' << r.comm_scalars << ',' << r.beta << ','
          << r.lambda_min << '\n';
    }
  }
}

void write_summary_csv(std::ostream& out, const std::vector<SummaryRow>& rows, const std::string& sweep_id,
                       bool header) {
  out << std::setprecision(9);
  if (header) {
    if (!sweep_id.empty()) out << "sweep_id,";
    out << "round,cum_expected_regret,cum_expected_regret_per_agent,cum_realized_regret,cum_violations,"
           "cum_conservative,expected_reward,baseline_reward,reward_floor,sync_epochs,comm_scalars\n";
  }
  for (const auto& r : rows) {
    write_prefix(out, sweep_id);
    out << r.round << ',' << r.cum_expected_regret << ',' << r.cum_expected_regret_per_agent << ','
        << r.cum_realized_regret << ',' << r.cum_violations << ',' << r.cum_conservative << ',' << r.expected_reward
        << ',' << r.baseline_reward << ',' << r.reward_floor << ',' << r.sync_epochs << ',' << r.comm_scalars << '\n';
  }
}

namespace {

std::ofstream open_output(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace

void write_experiment(const ExperimentResult& result, const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto rounds_path = std::filesystem::path(dir) / "rounds.csv";
  const auto summary_path = std::filesystem::path(dir) / "summary.csv";
  auto rounds = open_output(rounds_path);
  write_records_csv(rounds, result.trials);
  finish(rounds, rounds_path);
  auto summary = open_output(summary_path);
  write_summary_csv(summary, result.summary);
  finish(summary, summary_path);
}

void write_sweep(const std::vector<SweepEntry>& entries, const std::vector<ExperimentResult>& results,
                 const std::string& dir) {
  std::filesystem::create_directories(dir);
  const auto rounds_path = std::filesystem::path(dir) / "sweep_rounds.csv";
  const auto summary_path = std::filesystem::path(dir) / "sweep_summary.csv";
  auto rounds = open_output(rounds_path);
  auto summary = open_output(summary_path);
  for (std::size_t k = 0; k < results.size(); ++k) {
    write_records_csv(rounds, results[k].trials, entries[k].label, k == 0);
    write_summary_csv(summary, results[k].summary, entries[k].label, k == 0);
  }
  finish(rounds, rounds_path);
  finish(summary, summary_path);
}

}  // namespace disc
