// Desk-scale acceptance checks. Each invocation runs one criterion and prints a single
// PASS or FAIL line; the exit status is nonzero on FAIL.

#include "disc/data_ingest.hpp"
#include "disc/experiment.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <iostream>
#include <map>
#include <random>
#include <sstream>
#include <string>

namespace {

struct Verdict {
  bool pass = false;
  std::string detail;
};

std::string config_dir;

disc::RunConfig load(const std::string& name, const std::vector<disc::Override>& overrides = {}) {
  return disc::load_config(config_dir + "/" + name, overrides);
}

// Per-trial totals at the horizon, summed over agents.
struct TrialTotals {
  double regret = 0.0;
  int violations = 0;
  int conservative = 0;
};

TrialTotals totals(const disc::TrialResult& trial, int num_agents) {
  TrialTotals out;
  const std::size_t n = trial.records.size();
  for (int i = 0; i < num_agents; ++i) {
    const auto& r = trial.records[n - static_cast<std::size_t>(num_agents - i)];
    out.regret += r.cum_expected_regret;
    out.violations += r.cum_violations;
    out.conservative += r.cum_conservative;
  }
  return out;
}

std::string fmt(double x) {
  std::ostringstream s;
  s << std::setprecision(6) << x;
  return s.str();
}

double final_per_agent_regret(const disc::ExperimentResult& r) {
  return r.summary.back().cum_expected_regret_per_agent;
}

Verdict zero_violations() {
  int known = 0, unknown = 0;
  for (const char* mode : {"disc-ucb", "disc-ucb-ub"}) {
    const auto res = disc::run_experiment(load("synthetic_single.toml", {{"mode", mode}}));
    int total = 0;
    for (const auto& t : res.trials) total += totals(t, res.config.tasks.num_agents).violations;
    (std::string(mode) == "disc-ucb" ? known : unknown) = total;
  }
  return {known == 0 && unknown == 0,
          "violations disc-ucb " + std::to_string(known) + ", disc-ucb-ub " + std::to_string(unknown) + " (need 0)"};
}

Verdict sublinear_regret() {
  const auto res = disc::run_experiment(load("synthetic_single.toml"));
  const double r500 = res.summary.at(499).cum_expected_regret;
  const double r5000 = res.summary.at(4999).cum_expected_regret;
  const double early = r500 / 500.0, late = r5000 / 5000.0;
  return {late <= 0.5 * early, "R(500)/500 = " + fmt(early) + ", R(5000)/5000 = " + fmt(late) + " (need <= " +
                                   fmt(0.5 * early) + ")"};
}

Verdict collaboration_gain() {
  std::vector<disc::SweepEntry> entries;
  for (int m : {1, 3, 10}) entries.push_back({"M=" + std::to_string(m), load("collaboration.toml", {{"M", std::to_string(m)}})});
  const auto results = disc::compare_modes(entries);
  const double r1 = final_per_agent_regret(results[0]);
  const double r3 = final_per_agent_regret(results[1]);
  const double r10 = final_per_agent_regret(results[2]);
  return {r1 > r3 && r3 > r10 && r10 <= 0.8 * r1, "per-agent regret M=1 " + fmt(r1) + ", M=3 " + fmt(r3) +
                                                       ", M=10 " + fmt(r10) + " (need decreasing, M=10 <= " +
                                                       fmt(0.8 * r1) + ")"};
}

Verdict alpha_monotonicity() {
  std::vector<disc::SweepEntry> entries;
  for (const char* a : {"0.1", "0.3", "0.5"}) entries.push_back({std::string("alpha=") + a, load("alpha_sweep.toml", {{"alpha", a}})});
  const auto results = disc::compare_modes(entries);
  std::vector<double> r;
  for (const auto& res : results) r.push_back(res.summary.back().cum_expected_regret);
  return {r[0] >= r[1] && r[1] >= r[2],
          "regret alpha=0.1 " + fmt(r[0]) + ", 0.3 " + fmt(r[1]) + ", 0.5 " + fmt(r[2]) + " (need nonincreasing)"};
}

Verdict reward_floor() {
  std::int64_t failures = 0, rounds = 0, budget = 0;
  for (const char* mode : {"disc-ucb", "disc-ucb-ub"}) {
    const auto res = disc::run_experiment(load("synthetic_single.toml", {{"mode", mode}}));
    const auto& cfg = res.config;
    budget += static_cast<std::int64_t>(
        std::ceil(2.0 * cfg.tasks.num_agents * cfg.delta * cfg.horizon * cfg.trials - 1e-9));
    for (const auto& t : res.trials) {
      for (const auto& r : t.records) {
        ++rounds;
        if (r.expected_reward < (1.0 - cfg.alpha) * r.baseline_reward) ++failures;
      }
    }
  }
  return {failures <= budget, std::to_string(failures) + " of " + std::to_string(rounds) +
                                  " rounds below (1-alpha) r_b (budget " + std::to_string(budget) + ")"};
}

Verdict communication() {
  const auto res = disc::run_experiment(load("communication.toml"));
  const auto& cfg = res.config;
  const std::int64_t d = cfg.tasks.dim, m = cfg.tasks.num_agents;
  std::int64_t max_epochs = 0;
  bool exact = true;
  for (const auto& t : res.trials) {
    max_epochs = std::max(max_epochs, t.ledger.epochs);
    exact = exact && t.ledger.total_scalars() == t.ledger.epochs * m * 2 * (d * d + d);
  }
  return {max_epochs <= 60 && exact, "max sync epochs " + std::to_string(max_epochs) + " over " +
                                         std::to_string(cfg.trials) + " trials (need <= 60), ledger " +
                                         (exact ? "exact" : "mismatch")};
}

Verdict unknown_baseline_ordering() {
  const auto known = disc::run_experiment(load("synthetic_single.toml", {{"mode", "disc-ucb"}}));
  const auto unknown = disc::run_experiment(load("synthetic_single.toml", {{"mode", "disc-ucb-ub"}}));
  const int m = known.config.tasks.num_agents;
  int regret_ok = 0, conservative_ok = 0, both = 0;
  for (std::size_t k = 0; k < known.trials.size(); ++k) {
    const auto a = totals(known.trials[k], m);
    const auto b = totals(unknown.trials[k], m);
    const bool r = b.regret >= a.regret, c = b.conservative >= a.conservative;
    regret_ok += r;
    conservative_ok += c;
    both += r && c;
  }
  return {both >= 18, "UB regret >= known in " + std::to_string(regret_ok) + "/20, N^c >= in " +
                          std::to_string(conservative_ok) + "/20, both in " + std::to_string(both) + "/20 (need 18)"};
}

// --- criterion 8 helpers -------------------------------------------------------------

Eigen::VectorXd random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(d);
  do {
    for (int k = 0; k < d; ++k) v(k) = n01(rng);
  } while (v.norm() == 0.0);
  return v / v.norm();
}

double cofactor_det(const Eigen::MatrixXd& a) {
  if (a.rows() == 1) return a(0, 0);
  double det = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    Eigen::MatrixXd minor(a.rows() - 1, a.cols() - 1);
    for (Eigen::Index r = 1; r < a.rows(); ++r) {
      for (Eigen::Index c = 0, cc = 0; c < a.cols(); ++c) {
        if (c != j) minor(r - 1, cc++) = a(r, c);
      }
    }
    det += (j % 2 == 0 ? 1.0 : -1.0) * a(0, j) * cofactor_det(minor);
  }
  return det;
}

Eigen::MatrixXd adjugate(const Eigen::MatrixXd& a) {
  const Eigen::Index n = a.rows();
  Eigen::MatrixXd adj(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      Eigen::MatrixXd minor(n - 1, n - 1);
      for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
        if (r == i) continue;
        for (Eigen::Index c = 0, cc = 0; c < n; ++c) {
          if (c != j) minor(rr, cc++) = a(r, c);
        }
        ++rr;
      }
      adj(j, i) = ((i + j) % 2 == 0 ? 1.0 : -1.0) * cofactor_det(minor);
    }
  }
  return adj;
}

// Smallest root of the characteristic polynomial, built from principal minors.
double char_poly_min_root(const Eigen::MatrixXd& a) {
  if (a.rows() == 2) {
    const double tr = a.trace(), det = cofactor_det(a);
    return 0.5 * (tr - std::sqrt(std::max(0.0, tr * tr - 4.0 * det)));
  }
  const double c2 = a.trace();
  const double c1 = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0) + a(0, 0) * a(2, 2) - a(0, 2) * a(2, 0) + a(1, 1) * a(2, 2) -
                    a(1, 2) * a(2, 1);
  const double c0 = cofactor_det(a);
  // lambda^3 - c2 lambda^2 + c1 lambda - c0, three real roots by the trigonometric method
  const double shift = c2 / 3.0;
  const double p = c1 - c2 * c2 / 3.0;
  const double q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
  const double r = 2.0 * std::sqrt(-p / 3.0);
  const double arg = std::clamp(3.0 * q / (p * r), -1.0, 1.0);
  const double phi = std::acos(arg) / 3.0;
  double root = 1e300;
  for (int k = 0; k < 3; ++k) root = std::min(root, shift + r * std::cos(phi - 2.0 * M_PI * k / 3.0));
  return root;
}

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

Verdict oracle_equivalences() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(2024);
  std::normal_distribution<double> n01;
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  // (a) closed-form UCB vs sampling the ellipsoid boundary
  int ellipsoid_ok = 0;
  for (int inst = 0; inst < 100; ++inst) {
    const int d = 2 + inst % 2;
    disc::SymPsd v = disc::SymPsd::identity(d, 0.5 + unit(rng));
    for (int k = 0; k < 4; ++k) v.add_outer(random_unit(rng, d) * 2.0 * unit(rng));
    Eigen::VectorXd theta_hat(d);
    for (int k = 0; k < d; ++k) theta_hat(k) = n01(rng);
    const Eigen::VectorXd psi = random_unit(rng, d) * (0.1 + 0.9 * unit(rng));
    const double beta = 0.2 + 2.0 * unit(rng);
    const double closed = disc::ucb_value(psi, theta_hat, beta, v);
    const Eigen::LLT<Eigen::MatrixXd> llt(v.matrix());
    double sampled = -1e300;
    for (int s = 0; s < 100000; ++s) {
      sampled = std::max(sampled, psi.dot(theta_hat + beta * llt.matrixU().solve(random_unit(rng, d))));
    }
    ellipsoid_ok += sampled <= closed && sampled >= closed - 1e-3;
  }

  // (b) numerics vs cofactor expansions
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const int d = 2 + inst % 2;
    Eigen::MatrixXd b(d, d);
    for (Eigen::Index k = 0; k < b.size(); ++k) b.data()[k] = n01(rng);
    const disc::SymPsd a = disc::SymPsd::from_lower(Eigen::MatrixXd(b * b.transpose() + 0.1 * Eigen::MatrixXd::Identity(d, d)));
    Eigen::VectorXd rhs(d);
    for (int k = 0; k < d; ++k) rhs(k) = n01(rng);
    const double det = cofactor_det(a.matrix());
    const Eigen::VectorXd x = adjugate(a.matrix()) * rhs / det;
    worst = std::max(worst, rel(disc::logdet(a), std::log(det)));
    worst = std::max(worst, rel(disc::min_eigenvalue(a), char_poly_min_root(a.matrix())));
    worst = std::max(worst, (disc::solve_psd(a, rhs) - x).norm() / x.norm());
  }

  // (c) optimal action stays in the pruned set whenever the gate passes and theta* is inside
  std::int64_t gated = 0, contained = 0, failures = 0, budget = 0;
  for (const char* name : {"synthetic_single.toml", "gated_fleet.toml"}) {
    const auto cfg = load(name);
    budget += static_cast<std::int64_t>(std::ceil(2.0 * cfg.tasks.num_agents * cfg.delta * cfg.horizon * cfg.trials - 1e-9));
    for (int trial = 0; trial < cfg.trials; ++trial) {
      disc::run_trial(cfg, trial, [&](const disc::RoundTrace& tr) {
        if (!tr.decision.diag.gate_passed) return;
        ++gated;
        const auto& diag = tr.decision.diag;
        if (!disc::in_confidence_set(cfg.env.theta_star, diag.theta_hat, diag.beta, tr.state.gram())) return;
        ++contained;
        if (!std::binary_search(diag.pruned.begin(), diag.pruned.end(), tr.optimal.action)) ++failures;
      });
    }
  }

  // (d) conservative vector keeps the stage-wise floor
  int safety_failures = 0;
  disc::Rng zeta_rng(99);
  for (int draw = 0; draw < 100000; ++draw) {
    const int d = 2 + draw % 4;
    const Eigen::VectorXd theta = random_unit(rng, d) * (0.05 + 0.95 * unit(rng));
    Eigen::VectorXd psi_b = random_unit(rng, d) * unit(rng);
    if (psi_b.dot(theta) <= 0.0) psi_b = -psi_b;
    const double r_b = psi_b.dot(theta);
    if (r_b <= 0.0) continue;
    const double r_l = r_b * unit(rng), r_h = r_b + (1.0 - r_b) * unit(rng);
    const double alpha = 0.01 + 0.99 * unit(rng);
    const double rho = alpha * r_l / (1.0 + r_h) * unit(rng);
    const auto cv = disc::conservative_vector(psi_b, rho, zeta_rng);
    if (cv.psi.dot(theta) < (1.0 - alpha) * r_b) ++safety_failures;
  }

  const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const bool pass = ellipsoid_ok == 100 && worst <= 1e-8 && failures <= budget && safety_failures == 0 && seconds < 30.0;
  return {pass, "(a) " + std::to_string(ellipsoid_ok) + "/100 ellipsoids; (b) worst rel err " + fmt(worst) +
                    "; (c) " + std::to_string(failures) + " misses in " + std::to_string(contained) +
                    " contained of " + std::to_string(gated) + " gated rounds (budget " + std::to_string(budget) +
                    "); (d) " + std::to_string(safety_failures) + " safety failures; " + fmt(seconds) + " s"};
}

Verdict nmf_pipeline() {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd w(100, 3), h(3, 50);
  for (Eigen::Index k = 0; k < w.size(); ++k) w.data()[k] = unit(rng);
  for (Eigen::Index k = 0; k < h.size(); ++k) h.data()[k] = unit(rng);
  disc::ingest::NmfOptions opts;
  opts.rank = 3;
  opts.max_iters = 1000;
  opts.tol = 0.0;
  opts.seed = 3;
  const auto f = disc::ingest::nmf(w * h, opts);
  bool monotone = true;
  for (std::size_t k = 1; k < f.objective.size(); ++k) monotone = monotone && f.objective[k] <= f.objective[k - 1] * (1.0 + 1e-12);

  std::normal_distribution<double> n01;
  double worst = 0.0;
  for (int draw = 0; draw < 1000; ++draw) {
    Eigen::VectorXd a(3), b(3), c(3), d(3);
    for (auto* v : {&a, &b, &c, &d}) {
      for (int k = 0; k < 3; ++k) (*v)(k) = n01(rng);
    }
    const double lhs = disc::ingest::outer_vec(a, b).dot(disc::ingest::outer_vec(c, d));
    worst = std::max(worst, std::abs(lhs - a.dot(c) * b.dot(d)));
  }
  return {f.relative_error <= 0.02 && monotone && worst <= 1e-12,
          "relative error " + fmt(f.relative_error) + " after " + std::to_string(f.objective.size() - 1) +
              " iterations, objective " + (monotone ? "monotone" : "not monotone") + ", outer identity max gap " +
              fmt(worst)};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance criteria"};
  int criterion = 0;
  app.add_option("criterion", criterion, "criterion number")->required()->check(CLI::Range(1, 9));
  app.add_option("--configs", config_dir, "directory holding the criterion configs")->required();
  CLI11_PARSE(app, argc, argv);

  const std::map<int, std::pair<std::string, std::function<Verdict()>>> criteria = {
      {1, {"zero violations", zero_violations}},
      {2, {"sublinear regret", sublinear_regret}},
      {3, {"collaboration gain", collaboration_gain}},
      {4, {"alpha monotonicity", alpha_monotonicity}},
      {5, {"stage-wise reward floor", reward_floor}},
      {6, {"communication efficiency", communication}},
      {7, {"unknown-baseline ordering", unknown_baseline_ordering}},
      {8, {"oracle equivalences", oracle_equivalences}},
      {9, {"NMF pipeline", nmf_pipeline}},
  };
  const auto& [name, check] = criteria.at(criterion);
  Verdict v;
  try {
    v = check();
  } catch (const std::exception& e) {
    v = {false, std::string("error: ") + e.what()};
  }
  std::cout << (v.pass ? "PASS" : "FAIL") << " criterion " << criterion << " (" << name << "): " << v.detail << '\n';
  return v.pass ? 0 : 1;
}
