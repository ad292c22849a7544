#include "disc/agent.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using disc::AgentParams;
using disc::AgentState;
using disc::Mode;
using disc::SymPsd;

namespace {

Eigen::MatrixXd action_rows(std::initializer_list<std::pair<double, double>> xs) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(xs.size()), 2);
  Eigen::Index i = 0;
  for (const auto& [a, b] : xs) m.row(i++) << a, b;
  return m;
}

std::vector<int> one_d_prune(std::vector<double> estimates, double threshold_margin, double alpha, double r_b) {
  // rows (v, 0) with theta_hat = e1 give psi^T theta_hat = v
  Eigen::MatrixXd psis = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(estimates.size()), 2);
  for (std::size_t i = 0; i < estimates.size(); ++i) psis(static_cast<Eigen::Index>(i), 0) = estimates[i];
  return disc::prune_known(psis, Eigen::Vector2d(1, 0), threshold_margin, 1.0, alpha, r_b).actions;
}

Eigen::VectorXd random_unit(std::mt19937_64& rng, int d) {
  std::normal_distribution<double> n01;
  Eigen::VectorXd v(d);
  for (int k = 0; k < d; ++k) v(k) = n01(rng);
  return v.normalized();
}

}  // namespace

TEST_CASE("mode names round-trip") {
  for (Mode m : {Mode::KnownBaseline, Mode::UnknownBaseline, Mode::Unconstrained, Mode::Independent}) {
    CHECK(disc::parse_mode(disc::to_string(m)) == m);
  }
  CHECK(disc::to_string(Mode::KnownBaseline) == "disc-ucb");
  CHECK(disc::to_string(Mode::Unconstrained) == "dislinucb");
  CHECK_THROWS_AS(disc::parse_mode("greedy"), std::invalid_argument);
}

TEST_CASE("confidence_radius") {
  const double beta0 = disc::confidence_radius(SymPsd::identity(2), 1.0, 1.0, 0.1, 2);
  CHECK(beta0 == doctest::Approx(std::sqrt(2.0) * std::sqrt(2.0 * std::log(20.0)) + 1.0).epsilon(1e-12));
  CHECK(beta0 == doctest::Approx(4.4617).epsilon(1e-4));

  // the log term vanishes as delta approaches 2, leaving sqrt(lambda)
  double prev = disc::confidence_radius(SymPsd::identity(2), 1.0, 0.0, 0.5, 2);
  for (double delta : {0.9, 0.99, 0.999999}) {
    const double b = disc::confidence_radius(SymPsd::identity(2), 1.0, 0.0, delta, 2);
    CHECK(b < prev);
    CHECK(b > 1.0);
    prev = b;
  }

  SymPsd v = SymPsd::identity(2);
  v.add_outer(Eigen::Vector2d(1, 1));
  const SymPsd doubled = SymPsd::from_lower(v.matrix() * v.matrix());  // logdet doubles
  CHECK(disc::confidence_radius(doubled, 1.0, 0.1, 0.1, 2) > disc::confidence_radius(v, 1.0, 0.1, 0.1, 2));

  CHECK_THROWS_AS(disc::confidence_radius(v, 1.0, 0.1, 0.0, 2), std::invalid_argument);
  CHECK_THROWS_AS(disc::confidence_radius(v, 1.0, 0.1, 1.0, 2), std::invalid_argument);
}

TEST_CASE("estimate") {
  AgentParams p;
  AgentState s = AgentState::fresh(0, 2, p);
  CHECK(disc::estimate(s).isZero(0.0));
  disc::local_update(s, Eigen::Vector2d(1, 0), 1.0);
  CHECK(disc::estimate(s).isApprox(Eigen::Vector2d(0.5, 0.0)));

  AgentState big = AgentState::fresh(0, 2, p);
  const Eigen::Vector2d theta(0.9, 0.4);
  const Eigen::Vector2d e1(1, 0), e2(0, 1), e3(0.6, 0.8);
  for (int i = 0; i < 10000; ++i) {
    const Eigen::Vector2d& x = i % 3 == 0 ? e1 : (i % 3 == 1 ? e2 : e3);
    disc::local_update(big, x, x.dot(theta));
  }
  CHECK((disc::estimate(big) - theta).norm() <= 1e-3);
}

TEST_CASE("ucb_value examples") {
  const SymPsd eye = SymPsd::identity(2);
  CHECK(disc::ucb_value(Eigen::Vector2d(0, 0), Eigen::Vector2d(0.5, 0.5), 0.2, eye) == 0.0);
  CHECK(disc::ucb_value(Eigen::Vector2d(0.3, 0.7), Eigen::Vector2d(0.5, 0.5), 0.0, eye) == doctest::Approx(0.5));
  CHECK(disc::ucb_value(Eigen::Vector2d(1, 0), Eigen::Vector2d(0.5, 0.5), 0.2, eye) == doctest::Approx(0.7));

  // brute force over a fine grid of the ball ||theta - theta_hat|| <= 0.2
  double best = -1.0;
  const int n = 400;
  for (int i = 0; i <= n; ++i) {
    for (int j = 0; j <= n; ++j) {
      const Eigen::Vector2d off(-0.2 + 0.4 * i / n, -0.2 + 0.4 * j / n);
      if (off.norm() <= 0.2) best = std::max(best, Eigen::Vector2d(1, 0).dot(Eigen::Vector2d(0.5, 0.5) + off));
    }
  }
  CHECK(best == doctest::Approx(0.7).epsilon(1e-4));
}

TEST_CASE("ucb_value matches sampling of the ellipsoid boundary") {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> n01;
  for (int inst = 0; inst < 20; ++inst) {
    const int d = 2 + inst % 2;
    SymPsd v = SymPsd::identity(d, 0.5);
    for (int k = 0; k < 4; ++k) v.add_outer(random_unit(rng, d) * 2.0);
    Eigen::VectorXd psi(d), theta_hat(d);
    for (int k = 0; k < d; ++k) theta_hat(k) = n01(rng);
    psi = random_unit(rng, d) * std::uniform_real_distribution<double>(0.1, 1.0)(rng);
    const double beta = 0.5 + inst * 0.1;
    const double closed = disc::ucb_value(psi, theta_hat, beta, v);
    // boundary points theta_hat + beta L^{-T} u with V = L L^T and ||u|| = 1
    const Eigen::LLT<Eigen::MatrixXd> llt(v.matrix());
    double sampled = -1e300;
    for (int s = 0; s < 100000; ++s) {
      const Eigen::VectorXd u = random_unit(rng, d);
      const Eigen::VectorXd theta = theta_hat + beta * llt.matrixU().solve(u);
      sampled = std::max(sampled, psi.dot(theta));
    }
    CHECK(sampled <= closed + 1e-12);
    CHECK(sampled >= closed - 1e-3);
  }
}

TEST_CASE("prune_known examples") {
  CHECK(one_d_prune({0.6, 0.45, 0.3}, 0.1, 0.2, 0.5) == std::vector<int>{0});
  CHECK(one_d_prune({0.9, 0.7, 0.1}, 1.5, 0.5, 0.2).empty());
  CHECK(one_d_prune({0.0, 0.4, -0.1}, 0.0, 1.0, 0.8) == std::vector<int>{0, 1});
  CHECK_THROWS_AS(disc::prune_known(action_rows({{1, 0}}), Eigen::Vector2d(1, 0), 1.0, 0.0, 0.5, 0.5),
                  std::invalid_argument);
}

TEST_CASE("prune_unknown examples") {
  const SymPsd eye = SymPsd::identity(2);
  const Eigen::Vector2d theta_hat(1, 0);
  const Eigen::MatrixXd psis = action_rows({{0.8, 0}, {0.5, 0}, {0.2, 0}});

  // beta = 0: threshold (1 - alpha) psi_b^T theta_hat
  const auto zero_beta = disc::prune_unknown(psis, Eigen::Vector2d(0.5, 0), theta_hat, 0.0, eye, 1.0, 0.5);
  CHECK(zero_beta.threshold == doctest::Approx(0.25));
  CHECK(zero_beta.actions == std::vector<int>{0, 1});

  // psi_b = 0 reduces to the known-baseline rule with r_b = 0
  const auto zero_b = disc::prune_unknown(psis, Eigen::Vector2d(0, 0), theta_hat, 0.4, eye, 4.0, 0.5);
  CHECK(zero_b.actions == disc::prune_known(psis, theta_hat, 0.4, 4.0, 0.5, 0.0).actions);

  // baseline UCB 0.55 (0.5 + 0.1 * 0.5), alpha = 0.5, margin 0.1: threshold 0.375
  const auto hand = disc::prune_unknown(action_rows({{0.8, 0}, {0.5, 0}}), Eigen::Vector2d(0.5, 0), theta_hat, 0.1,
                                        eye, 1.0, 0.5);
  CHECK(hand.threshold == doctest::Approx(0.375));
  CHECK(hand.actions == std::vector<int>{0, 1});
}

TEST_CASE("pruning is monotone in its threshold") {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 200; ++trial) {
    Eigen::MatrixXd psis(30, 2);
    for (Eigen::Index i = 0; i < psis.rows(); ++i) psis.row(i) = random_unit(rng, 2).transpose() * unit(rng);
    const Eigen::VectorXd theta_hat = random_unit(rng, 2);
    const double beta = unit(rng), lmin = 1.0 + 10 * unit(rng), alpha = unit(rng), rb = unit(rng);
    const auto base = disc::prune_known(psis, theta_hat, beta, lmin, alpha, rb).actions;
    const auto tighter = {
        disc::prune_known(psis, theta_hat, beta * 1.5, lmin, alpha, rb).actions,
        disc::prune_known(psis, theta_hat, beta, lmin * 0.5, alpha, rb).actions,
        disc::prune_known(psis, theta_hat, beta, lmin, alpha * 0.5, rb).actions,
        disc::prune_known(psis, theta_hat, beta, lmin, alpha, rb * 1.5).actions,
    };
    for (const auto& subset : tighter) {
      CHECK(std::includes(base.begin(), base.end(), subset.begin(), subset.end()));
    }
  }
}

TEST_CASE("gate thresholds") {
  CHECK(disc::gate_threshold(1.0, 0.5, 0.5, Mode::KnownBaseline) == doctest::Approx(64.0));
  CHECK(disc::gate(1.0, 70.0, 0.5, 0.5, Mode::KnownBaseline));
  CHECK(disc::gate_threshold(1.0, 0.5, 0.5, Mode::UnknownBaseline) == doctest::Approx(144.0));
  CHECK_FALSE(disc::gate(1.0, 70.0, 0.5, 0.5, Mode::UnknownBaseline));
  CHECK(disc::gate(100.0, 0.01, 0.1, 0.1, Mode::Unconstrained));
  CHECK_THROWS_AS(disc::gate(1.0, 70.0, 0.0, 0.5, Mode::KnownBaseline), std::invalid_argument);
}

TEST_CASE("rho defaults and range checks") {
  CHECK(disc::default_rho(Mode::KnownBaseline, 0.3, 0.4, 0.9) == doctest::Approx(0.3 * 0.4 / 1.9));
  CHECK(disc::default_rho(Mode::UnknownBaseline, 0.3, 0.4, 0.9) == doctest::Approx(0.99 * 0.3 * 0.4 / 2));
  AgentParams p;
  p.alpha = 0.3;
  p.r_l = 0.4;
  p.r_h = 0.9;
  p.rho = 0.3 * 0.4 / 1.9;
  CHECK_NOTHROW(disc::check_rho(p));
  p.rho *= 1.01;
  CHECK_THROWS_AS(disc::check_rho(p), std::invalid_argument);
  p.mode = Mode::UnknownBaseline;
  p.rho = 0.3 * 0.4 / 2;  // open interval excludes the endpoint
  CHECK_THROWS_AS(disc::check_rho(p), std::invalid_argument);
}

TEST_CASE("conservative_vector") {
  disc::Rng rng(41);
  const Eigen::Vector2d psi_b(0.6, 0.3);
  const auto tiny = disc::conservative_vector(psi_b, 1e-9, rng);
  CHECK((tiny.psi - psi_b).norm() < 1e-8);

  const auto pure = disc::conservative_vector(Eigen::Vector2d::Zero(), 0.25, rng);
  CHECK(pure.psi.norm() == doctest::Approx(0.25));

  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const auto c = disc::conservative_vector(Eigen::Vector3d(0.5, 0.5, 0.5), 0.3, rng);
    CHECK(c.zeta.norm() == doctest::Approx(1.0));
    mean += c.zeta;
    if (c.psi.norm() > 1.0) FAIL("conservative feature left the unit ball");
  }
  mean /= n;
  CHECK(mean.cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("conservative play never violates the stage-wise floor") {
  std::mt19937_64 rng(53);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  int failures = 0;
  for (int draw = 0; draw < 100000; ++draw) {
    const int d = 2 + draw % 4;
    const Eigen::VectorXd theta = random_unit(rng, d) * (0.2 + 0.8 * unit(rng));
    // psi_b scaled so that r_b lies in [r_l, r_h] within [0, 1]
    const double r_l = 0.05 + 0.5 * unit(rng);
    const double r_h = r_l + (1.0 - r_l) * unit(rng);
    const double r_b = r_l + (r_h - r_l) * unit(rng);
    if (r_b > theta.norm()) continue;
    const Eigen::VectorXd psi_b = theta.normalized() * (r_b / theta.norm());
    const double alpha = 0.01 + 0.99 * unit(rng);
    const double rho = alpha * r_l / (1.0 + r_h) * unit(rng);
    const Eigen::VectorXd zeta = random_unit(rng, d);
    const double reward = ((1.0 - rho) * psi_b + rho * zeta).dot(theta);
    if (reward < (1.0 - alpha) * r_b) ++failures;
  }
  CHECK(failures == 0);
}

TEST_CASE("select examples") {
  AgentParams p;
  p.alpha = 0.3;
  p.r_l = 0.2;
  p.rho = 0.05;
  disc::Rng rng(61);
  const Eigen::MatrixXd psis = action_rows({{0.9, 0.1}, {0.5, 0.5}, {0.3, 0.1}});
  const disc::BaselineInfo baseline{1, 0.5};

  const AgentState fresh = AgentState::fresh(0, 2, p);
  const auto first = disc::select(fresh, psis, baseline, rng);
  CHECK(first.conservative());
  CHECK(first.action() == -1);
  CHECK_FALSE(first.diag.gate_passed);
  CHECK(first.diag.lambda_min == doctest::Approx(1.0));
  CHECK(std::get<disc::Conservative>(first.kind).baseline_action == 1);

  // exact greedy with the truth: theta_hat = theta*, beta = 0 is emulated by a huge,
  // noiseless design so the radius term is negligible against the reward gaps
  p.mode = Mode::Unconstrained;
  AgentState learned = AgentState::fresh(0, 2, p);
  const Eigen::Vector2d theta(0.2, 0.9);
  for (int i = 0; i < 200000; ++i) {
    const Eigen::Vector2d x = i % 2 == 0 ? Eigen::Vector2d(1, 0) : Eigen::Vector2d(0, 1);
    disc::local_update(learned, x, x.dot(theta));
  }
  const auto greedy = disc::select(learned, psis, baseline, rng);
  CHECK_FALSE(greedy.conservative());
  CHECK(greedy.action() == 1);
}

TEST_CASE("select picks the larger UCB inside the pruned set") {
  // V = 4I, theta_hat = [0.5, 0.1], beta = 0.2: UCBs 0.6 and 0.2
  const SymPsd v = SymPsd::identity(2, 4.0);
  const Eigen::Vector2d theta_hat(0.5, 0.1);
  CHECK(disc::ucb_value(Eigen::Vector2d(1, 0), theta_hat, 0.2, v) == doctest::Approx(0.6));
  CHECK(disc::ucb_value(Eigen::Vector2d(0, 1), theta_hat, 0.2, v) == doctest::Approx(0.2));
}

TEST_CASE("local_update") {
  AgentParams p;
  AgentState s = AgentState::fresh(0, 2, p);
  const AgentState before = s;
  disc::local_update(s, Eigen::Vector2d::Zero(), 3.0);
  CHECK(s.w_loc == before.w_loc);
  CHECK(s.u_loc == before.u_loc);

  disc::local_update(s, Eigen::Vector2d(1, 0), 0.5);
  CHECK(s.u_loc == Eigen::Vector2d(0.5, 0));
  CHECK(s.w_loc.matrix() == Eigen::Matrix2d{{1, 0}, {0, 0}});

  AgentState a = AgentState::fresh(0, 2, p), b = AgentState::fresh(0, 2, p);
  disc::local_update(a, Eigen::Vector2d(0.3, 0.4), 0.2);
  disc::local_update(a, Eigen::Vector2d(-0.1, 0.7), 0.9);
  disc::local_update(b, Eigen::Vector2d(-0.1, 0.7), 0.9);
  disc::local_update(b, Eigen::Vector2d(0.3, 0.4), 0.2);
  CHECK(a.w_loc.matrix().isApprox(b.w_loc.matrix(), 1e-15));
  CHECK(a.u_loc.isApprox(b.u_loc, 1e-15));
}

TEST_CASE("sync trigger") {
  AgentParams p;
  AgentState s = AgentState::fresh(0, 2, p);
  CHECK_FALSE(disc::sync_due(s, 0, 1.0));
  CHECK_FALSE(disc::sync_due(s, 50, 1.0));
  disc::local_update(s, Eigen::Vector2d(1, 0), 0.0);
  CHECK_FALSE(disc::sync_due(s, 0, 1.0));
  CHECK(disc::sync_due(s, 10, 1.0));
  CHECK_FALSE(disc::sync_due(s, 10, std::numeric_limits<double>::infinity()));

  const double b = disc::default_sync_threshold(1000, 4, 2);
  CHECK(b == doctest::Approx(1000.0 * std::log(4000.0) / 8.0));
  CHECK(b == doctest::Approx(1036.7).epsilon(1e-4));
  CHECK(0.5 * 10 < b);
}

TEST_CASE("radius never shrinks along rank-one updates") {
  std::mt19937_64 rng(71);
  SymPsd v = SymPsd::identity(3);
  double prev = disc::confidence_radius(v, 1.0, 0.1, 0.01, 3);
  for (int k = 0; k < 500; ++k) {
    v.add_outer(random_unit(rng, 3));
    const double beta = disc::confidence_radius(v, 1.0, 0.1, 0.01, 3);
    CHECK(beta >= prev);
    prev = beta;
  }
}

TEST_CASE("unconstrained selection matches a plain optimistic reference") {
  std::mt19937_64 rng(83);
  std::normal_distribution<double> n01;
  AgentParams p;
  p.mode = Mode::Unconstrained;
  p.sigma = 0.1;
  AgentState s = AgentState::fresh(0, 3, p);
  disc::Rng zeta_rng(1);

  Eigen::Matrix3d a = Eigen::Matrix3d::Identity();
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  const Eigen::Vector3d theta = random_unit(rng, 3) * 0.8;
  for (int t = 0; t < 300; ++t) {
    Eigen::MatrixXd psis(12, 3);
    for (Eigen::Index x = 0; x < psis.rows(); ++x) psis.row(x) = random_unit(rng, 3).transpose() * 0.9;

    // reference: explicit inverse, no pruning, no gate
    const Eigen::Matrix3d a_inv = a.inverse();
    const Eigen::Vector3d th = a_inv * b;
    const double logdet = std::log(a.determinant());
    const double beta = std::sqrt(1.0 + p.sigma * p.sigma) * std::sqrt(2.0 * (0.5 * logdet + std::log(2.0 / p.delta))) +
                        std::sqrt(p.lambda);
    int ref = 0;
    double ref_value = -1e300;
    for (int x = 0; x < psis.rows(); ++x) {
      const Eigen::Vector3d v = psis.row(x).transpose();
      const double value = v.dot(th) + beta * std::sqrt(v.dot(a_inv * v));
      if (value > ref_value + 1e-12) {
        ref_value = value;
        ref = x;
      }
    }

    for (double alpha : {0.1, 0.9}) {
      AgentState alt = s;
      alt.params.alpha = alpha;
      CHECK(disc::select(alt, psis, {0, 0.0}, zeta_rng).action() == ref);
    }
    const Eigen::Vector3d played = psis.row(ref).transpose();
    const double y = played.dot(theta) + 0.1 * n01(rng);
    disc::local_update(s, played, y);
    a += played * played.transpose();
    b += played * y;
  }
}
