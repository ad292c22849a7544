#include "disc/data_ingest.hpp"
#include "disc/experiment.hpp"

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

namespace {

// Exit codes: 0 success, 1 bad configuration or arguments, 2 runtime failure.
constexpr int kConfigError = 1;
constexpr int kRuntimeError = 2;

std::vector<std::string> split_top_level(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  int depth = 0;
  for (char c : text) {
    if (c == '[') ++depth;
    if (c == ']') --depth;
    if (c == ',' && depth == 0) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(c);
    }
  }
  parts.push_back(cur);
  return parts;
}

void print_run_summary(const disc::ExperimentResult& result) {
  const auto& last = result.summary.back();
  std::cout << "mode=" << disc::to_string(result.config.mode) << " T=" << result.config.horizon
            << " M=" << result.config.tasks.num_agents << " trials=" << result.config.trials << '\n'
            << "  mean cumulative regret   " << last.cum_expected_regret << '\n'
            << "  mean violations          " << last.cum_violations << '\n'
            << "  mean conservative rounds " << last.cum_conservative << '\n'
            << "  mean sync epochs         " << last.sync_epochs << '\n'
            << "  mean scalars sent        " << last.comm_scalars << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Distributed stage-wise conservative linear contextual bandits"};
  app.require_subcommand(1);
  unsigned threads = 0;
  app.add_option("-j,--threads", threads, "worker threads for trials (0 = hardware concurrency)");

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> sets;

  auto* run = app.add_subcommand("run", "run one configuration and write rounds.csv and summary.csv");
  run->add_option("-c,--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);
  run->add_option("-o,--out", out_dir, "output directory (defaults to [run] output)");
  std::optional<int> trials;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
  run->add_option("--trials", trials, "override [run] trials");
  run->add_option("--seed", seed, "override [run] seed");
  run->add_option("--mode", mode, "override [algo] mode")
      ->check(CLI::IsMember({"disc-ucb", "disc-ucb-ub", "dislinucb", "independent"}));
  run->add_option("--set", sets, "override any key, e.g. --set constraint.alpha=0.5");

  auto* sweep = app.add_subcommand("sweep", "run one configuration per value of a key and write sweep CSVs");
  sweep->add_option("-c,--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);
  sweep->add_option("-o,--out", out_dir, "output directory (defaults to [run] output)");
  std::string vary;
  sweep->add_option("--vary", vary, "key=v1,v2,... (e.g. mode=disc-ucb,dislinucb or alpha=0.1,0.3)")->required();
  sweep->add_option("--set", sets, "override any key before sweeping");

  auto* check = app.add_subcommand("validate", "parse and validate a config without running it");
  check->add_option("-c,--config", config_path, "TOML config file")->required()->check(CLI::ExistingFile);

  auto* ingest = app.add_subcommand("ingest", "factorize a ratings dataset into a feature table");
  std::string dataset;
  std::string data_path;
  int rank = 3;
  std::uint64_t ingest_seed = 0;
  std::optional<int> users;
  std::optional<int> items;
  int min_interactions = 30;
  std::vector<double> theta;
  ingest->add_option("--dataset", dataset, "movielens or lastfm")
      ->required()
      ->check(CLI::IsMember({"movielens", "lastfm"}));
  ingest->add_option("--path", data_path, "u.data or user_artists.dat")->required()->check(CLI::ExistingFile);
  ingest->add_option("--rank", rank, "factorization rank")->check(CLI::PositiveNumber);
  ingest->add_option("--seed", ingest_seed, "seed for sub-selection and initialization");
  ingest->add_option("--users", users, "keep a random subset of users (movielens)");
  ingest->add_option("--items", items, "keep a random subset of items (movielens)");
  ingest->add_option("--min-interactions", min_interactions, "minimum interactions per user (lastfm)");
  ingest->add_option("--theta", theta, "theta* used to cap feature rewards at 1")->delimiter(',');
  ingest->add_option("-o,--out", out_dir, "output CSV path")->required();

  CLI11_PARSE(app, argc, argv);

  std::vector<disc::Override> overrides;
  try {
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos) throw disc::ConfigError("--set expects key=value, got '" + s + "'");
      overrides.emplace_back(s.substr(0, eq), s.substr(eq + 1));
    }
    if (trials) overrides.emplace_back("run.trials", std::to_string(*trials));
    if (seed) overrides.emplace_back("run.seed", std::to_string(*seed));
    if (mode) overrides.emplace_back("algo.mode", *mode);
  } catch (const disc::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConfigError;
  }

  if (*check) {
    try {
      const auto cfg = disc::load_config(config_path);
      std::cout << config_path << ": ok (mode " << disc::to_string(cfg.mode) << ", M = " << cfg.tasks.num_agents
                << ", d = " << cfg.tasks.dim << ", T = " << cfg.horizon << ")\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    }
  }

  if (*run) {
    disc::RunConfig cfg;
    try {
      cfg = disc::load_config(config_path, overrides);
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    }
    try {
      const auto result = disc::run_experiment(cfg, threads);
      const std::string dir = out_dir.empty() ? cfg.output : out_dir;
      disc::write_experiment(result, dir);
      print_run_summary(result);
      std::cout << "wrote " << (std::filesystem::path(dir) / "rounds.csv").string() << " and summary.csv\n";
      return 0;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kRuntimeError;
    }
  }

  if (*sweep) {
    std::vector<disc::SweepEntry> entries;
    try {
      const auto eq = vary.find('=');
      if (eq == std::string::npos) throw disc::ConfigError("--vary expects key=v1,v2,...");
      const std::string key = vary.substr(0, eq);
      for (const auto& value : split_top_level(vary.substr(eq + 1))) {
        if (value.empty()) throw disc::ConfigError("--vary has an empty value");
        auto with_value = overrides;
        with_value.emplace_back(key, value);
        entries.push_back({key + "=" + value, disc::load_config(config_path, with_value)});
      }
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    }
    try {
      const auto results = disc::compare_modes(entries, threads);
      const std::string dir = out_dir.empty() ? entries.front().config.output : out_dir;
      disc::write_sweep(entries, results, dir);
      for (const auto& r : results) print_run_summary(r);
      std::cout << "wrote " << (std::filesystem::path(dir) / "sweep_rounds.csv").string()
                << " and sweep_summary.csv\n";
      return 0;
    } catch (const disc::ConfigError& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kRuntimeError;
    }
  }

  if (*ingest) {
    try {
      disc::ingest::RatingMatrix ratings;
      if (dataset == "movielens") {
        disc::ingest::MovieLensOptions opts;
        opts.users = users;
        opts.items = items;
        opts.seed = ingest_seed;
        ratings = disc::ingest::parse_movielens(data_path, opts);
      } else {
        ratings = disc::ingest::parse_lastfm(data_path, min_interactions);
      }
      for (const auto& w : ratings.warnings) std::cerr << "warning: " << w << '\n';
      disc::ingest::NmfOptions nmf_opts;
      nmf_opts.rank = rank;
      nmf_opts.seed = ingest_seed;
      const auto factors = disc::ingest::nmf(ratings.values, nmf_opts);
      std::optional<Eigen::VectorXd> theta_star;
      if (!theta.empty()) {
        if (static_cast<int>(theta.size()) != rank * rank) {
          throw std::invalid_argument("--theta needs rank^2 = " + std::to_string(rank * rank) + " entries");
        }
        theta_star = Eigen::Map<const Eigen::VectorXd>(theta.data(), static_cast<Eigen::Index>(theta.size()));
      }
      const auto features = disc::ingest::build_features(factors, theta_star);
      disc::ingest::write_features_csv(features, out_dir);
      std::cout << dataset << ": " << ratings.values.rows() << " contexts x " << ratings.values.cols()
                << " actions, rank " << rank << ", relative error " << factors.relative_error << ", scale "
                << features.scale << "\nwrote " << out_dir << '\n';
      return 0;
    } catch (const std::invalid_argument& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kConfigError;
    } catch (const std::exception& e) {
      std::cerr << "error: " << e.what() << '\n';
      return kRuntimeError;
    }
  }
  return 0;
}
