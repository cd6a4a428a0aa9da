#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "simplex_eval/errors.hpp"
#include "simplex_eval/hmc_engine.hpp"
#include "simplex_eval/rng.hpp"

using namespace simplex_eval;

namespace {

double std_gauss_logp(const Eigen::VectorXd& x) { return -0.5 * x.squaredNorm(); }
Eigen::VectorXd std_gauss_grad(const Eigen::VectorXd& x) { return -x; }

ChainState fresh_chain(const Eigen::VectorXd& pos, const LogTargetFn& logp,
                       const GradFn& grad, double step, std::size_t capacity = 4096) {
  ChainState st(capacity);
  st.position = pos;
  st.log_target = logp(pos);
  st.grad = grad(pos);
  st.step_size = step;
  return st;
}

// Adaptation rounds followed by a freeze; returns the chain ready to sample.
ChainState adapted_chain(const LogTargetFn& logp, const GradFn& grad, const HmcConfig& cfg,
                         const Eigen::VectorXd& start, double step0, RngStream& rng,
                         int rounds = 100, int round_size = 50) {
  ChainState st = fresh_chain(start, logp, grad, step0);
  for (int r = 0; r < rounds; ++r) {
    for (int i = 0; i < round_size; ++i) hmc_step(logp, grad, cfg, st, rng);
    adapt_step_size(st, cfg.target_accept, cfg.adapt_eta0, round_size);
  }
  st.adaptation_frozen = true;
  return st;
}

double leapfrog_dh(double h, int n, double q0, double p0) {
  const GradFn grad = [](const Eigen::VectorXd& x) { return Eigen::VectorXd(-x); };
  Eigen::VectorXd q(1), p(1);
  q << q0;
  p << p0;
  const double h0 = 0.5 * q.squaredNorm() + 0.5 * p.squaredNorm();
  const LeapfrogResult r = leapfrog(grad, q, p, h, n);
  const double h1 = 0.5 * r.position.squaredNorm() + 0.5 * r.momentum.squaredNorm();
  return h1 - h0;
}

}  // namespace

TEST_CASE("leapfrog is time reversible") {
  RngStream rng(41);
  Eigen::MatrixXd a(5, 5);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) a(i, j) = rng.normal();
  const Eigen::MatrixXd spd = a * a.transpose() + Eigen::MatrixXd::Identity(5, 5);
  const GradFn grad = [&](const Eigen::VectorXd& x) { return Eigen::VectorXd(-spd * x); };

  Eigen::VectorXd q(5), p(5);
  for (int i = 0; i < 5; ++i) {
    q[i] = rng.normal();
    p[i] = rng.normal();
  }
  const LeapfrogResult fwd = leapfrog(grad, q, p, 0.05, 3);
  const LeapfrogResult back = leapfrog(grad, fwd.position, -fwd.momentum, 0.05, 3);
  CHECK((back.position - q).cwiseAbs().maxCoeff() < 1e-10);
  CHECK((back.momentum + p).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("leapfrog conserves energy at a small step") {
  CHECK(std::abs(leapfrog_dh(1e-3, 3, 1.3, 0.7)) < 1e-8);
}

TEST_CASE("leapfrog energy error shrinks at second order") {
  // Fixed total time 0.6: halving the step while doubling the count cuts
  // |dH| by 4.
  const double e1 = std::abs(leapfrog_dh(0.1, 6, 1.3, 0.7));
  const double e2 = std::abs(leapfrog_dh(0.05, 12, 1.3, 0.7));
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
}

TEST_CASE("leapfrog on a flat target is pure drift") {
  const GradFn zero = [](const Eigen::VectorXd& x) { return Eigen::VectorXd::Zero(x.size()); };
  Eigen::VectorXd q(2), p(2);
  q << 0.5, -0.25;
  p << 1.0, 2.0;
  const LeapfrogResult r = leapfrog(zero, q, p, 0.1, 4);
  CHECK((r.position - (q + 4 * 0.1 * p)).norm() < 1e-14);
  CHECK((r.momentum - p).norm() < 1e-14);
}

TEST_CASE("leapfrog flags divergence") {
  const GradFn bad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(x.size());
    g.setConstant(std::numeric_limits<double>::quiet_NaN());
    return g;
  };
  const LeapfrogResult r = leapfrog(bad, Eigen::VectorXd::Zero(1), Eigen::VectorXd::Ones(1), 0.1, 3);
  CHECK(r.divergent);
}

TEST_CASE("hmc_step accepts everything in the small-step limit") {
  RngStream rng(42);
  HmcConfig cfg;
  ChainState st = fresh_chain(Eigen::VectorXd::Ones(2), std_gauss_logp, std_gauss_grad, 1e-6);
  int accepted = 0;
  for (int i = 0; i < 100; ++i) accepted += hmc_step(std_gauss_logp, std_gauss_grad, cfg, st, rng);
  CHECK(accepted == 100);
  CHECK(st.trace.size() == 100);
}

TEST_CASE("adapt_step_size direction and guards") {
  ChainState st = fresh_chain(Eigen::VectorXd::Zero(1), std_gauss_logp, std_gauss_grad, 0.2);

  st.round_attempted = 50;
  st.round_accepted = 50;
  adapt_step_size(st, 0.8, 1.0);
  CHECK(st.step_size > 0.2);

  const double before = st.step_size;
  st.round_attempted = 50;
  st.round_accepted = 0;
  adapt_step_size(st, 0.8, 1.0);
  CHECK(st.step_size < before);

  st.round_attempted = 10;
  CHECK_THROWS_AS(adapt_step_size(st, 0.8, 1.0), InputError);

  st.adaptation_frozen = true;
  st.round_attempted = 50;
  st.round_accepted = 50;
  const double frozen = st.step_size;
  adapt_step_size(st, 0.8, 1.0);
  CHECK(st.step_size == frozen);
}

TEST_CASE("tuned chain matches the 2-D Gaussian and holds its step") {
  RngStream rng(43);
  HmcConfig cfg;
  Eigen::VectorXd start(2);
  start << 1.0, 1.0;
  ChainState st = adapted_chain(std_gauss_logp, std_gauss_grad, cfg, start, 0.5, rng);

  const double frozen_step = st.step_size;
  const std::uint64_t acc0 = st.accepted, att0 = st.attempted;

  const int n = 20000;
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  Eigen::VectorXd sq = Eigen::VectorXd::Zero(2);
  for (int i = 0; i < n; ++i) {
    hmc_step(std_gauss_logp, std_gauss_grad, cfg, st, rng);
    mean += st.position;
    sq += st.position.cwiseProduct(st.position);
  }
  mean /= n;
  const double accept_rate = static_cast<double>(st.accepted - acc0) /
                             static_cast<double>(st.attempted - att0);

  CHECK(st.step_size == frozen_step);
  CHECK(accept_rate >= 0.70);
  CHECK(accept_rate <= 0.90);
  for (int c = 0; c < 2; ++c) {
    CHECK(std::abs(mean[c]) < 0.05);
    CHECK(sq[c] / n - mean[c] * mean[c] == doctest::Approx(1.0).epsilon(0.10));
  }
}

TEST_CASE("chain histogram matches quadrature on a double well") {
  // logp(x) = -2 (x^2 - 1)^2; two modes at +-1 with a crossable barrier.
  const LogTargetFn logp = [](const Eigen::VectorXd& x) {
    const double d = x[0] * x[0] - 1.0;
    return -2.0 * d * d;
  };
  const GradFn grad = [](const Eigen::VectorXd& x) {
    Eigen::VectorXd g(1);
    g[0] = -8.0 * x[0] * (x[0] * x[0] - 1.0);
    return g;
  };

  RngStream rng(44);
  HmcConfig cfg;
  ChainState st = adapted_chain(logp, grad, cfg, Eigen::VectorXd::Ones(1), 0.3, rng, 50, 50);

  const double lo = -2.5, hi = 2.5;
  const int bins = 40;
  std::vector<double> counts(bins, 0.0);
  const int n = 200000;
  int inside = 0;
  for (int i = 0; i < n; ++i) {
    hmc_step(logp, grad, cfg, st, rng);
    const double x = st.position[0];
    if (x >= lo && x < hi) {
      ++counts[static_cast<int>((x - lo) / (hi - lo) * bins)];
      ++inside;
    }
  }

  // Quadrature reference on a fine grid.
  const int grid = 20000;
  std::vector<double> ref(bins, 0.0);
  double z = 0.0;
  for (int g = 0; g < grid; ++g) {
    const double x = lo + (g + 0.5) * (hi - lo) / grid;
    Eigen::VectorXd v(1);
    v << x;
    const double w = std::exp(logp(v));
    z += w;
    ref[g * bins / grid] += w;
  }

  double tv = 0.0;
  for (int k = 0; k < bins; ++k) tv += std::abs(counts[k] / inside - ref[k] / z);
  CHECK(tv / 2.0 < 0.05);
}

TEST_CASE("check_convergence verdicts") {
  const std::vector<double> flat(500, 3.25);
  const auto ok = check_convergence({flat, flat}, 500, 1e-7, 3.0);
  CHECK(ok.converged);
  CHECK(ok.slopes[0] == 0.0);

  std::vector<double> rising(500);
  for (int i = 0; i < 500; ++i) rising[i] = 1e-3 * i;
  const auto bad_slope = check_convergence({rising, flat}, 500, 1e-4, 3.0);
  CHECK_FALSE(bad_slope.converged);
  CHECK(bad_slope.slopes[0] == doctest::Approx(1e-3).epsilon(1e-9));

  RngStream rng(45);
  std::vector<double> near0(500), near100(500);
  for (int i = 0; i < 500; ++i) {
    near0[i] = rng.normal();
    near100[i] = 100.0 + rng.normal();
  }
  const auto split = check_convergence({near0, near100}, 500, 1.0, 3.0);
  CHECK_FALSE(split.converged);
  CHECK(split.mean_spread > 3.0 * split.pooled_std);

  const auto short_trace = check_convergence({{1.0, 2.0}}, 500, 1e-7, 3.0);
  CHECK_FALSE(short_trace.converged);
}

TEST_CASE("autocorrelation of white noise stays inside the band") {
  RngStream rng(46);
  const std::size_t n = 100000;
  std::vector<double> series(n);
  for (auto& v : series) v = rng.normal();
  const auto acf = autocorrelation(series, 100);
  CHECK(acf[0] == 1.0);
  for (std::size_t k = 1; k <= 100; ++k) CHECK(std::abs(acf[k]) < 3.0 / std::sqrt(double(n)));
  CHECK(select_lag(acf, 2.0 / std::sqrt(double(n))) == 1);
}

TEST_CASE("autocorrelation tracks the AR(1) closed form") {
  RngStream rng(47);
  const std::size_t n = 100000;
  std::vector<double> series(n);
  double x = 0.0;
  for (auto& v : series) {
    x = 0.9 * x + rng.normal();
    v = x;
  }
  const auto acf = autocorrelation(series, 60);
  for (int k = 1; k <= 20; ++k) CHECK(std::abs(acf[k] - std::pow(0.9, k)) < 0.05);
}

TEST_CASE("autocorrelation guards") {
  const auto acf = autocorrelation(std::vector<double>(100, 7.0), 10);
  CHECK(acf[0] == 1.0);
  for (int k = 1; k <= 10; ++k) CHECK(acf[k] == 0.0);
  CHECK_THROWS_AS(autocorrelation({1.0}, 5), InputError);
}

TEST_CASE("select_lag on the AR(1) closed form") {
  // First k with 0.9^k below 2/sqrt(1e5) = 0.0063246 is 49.
  std::vector<double> acf(101);
  for (int k = 0; k <= 100; ++k) acf[k] = std::pow(0.9, k);
  CHECK(select_lag(acf, 2.0 / std::sqrt(1e5)) == 49);
  CHECK_THROWS_AS(select_lag(acf, 1e-6), ConvergenceError);
}

TEST_CASE("run_chains samples the 2-D Gaussian deterministically") {
  HmcConfig cfg;
  cfg.n_chains = 4;
  cfg.convergence_window = 2000;
  cfg.trace_capacity = 4000;
  cfg.check_interval = 1000;
  cfg.max_iterations = 50000;
  cfg.slope_threshold = 4e-7;  // 2e-4 effective at the 2000 window
  cfg.max_lag = 500;
  cfg.target_draws = 1000;

  const ChainInitFn init = [](int chain, RngStream& rng) {
    Eigen::VectorXd x(2);
    x << rng.normal() + chain, rng.normal() - chain;
    return x;
  };

  RngStream rng_a(48);
  const HmcRunResult a = run_chains(std_gauss_logp, std_gauss_grad, cfg, init, rng_a);
  CHECK(a.final_report.converged);
  CHECK(a.selected_lag >= 1);
  CHECK(a.post_adapt_iterations <= cfg.max_iterations);

  const auto draws = draw_samples(a, a.selected_lag, a.selected_lag, 1000);
  REQUIRE(draws.size() == 1000);
  Eigen::VectorXd mean = Eigen::VectorXd::Zero(2);
  for (const auto& d : draws) mean += d;
  mean /= 1000.0;
  CHECK(std::abs(mean[0]) < 0.15);
  CHECK(std::abs(mean[1]) < 0.15);

  // Thinned draws pass the white-noise band at lag 1.
  std::vector<double> c0;
  for (const auto& d : draws) c0.push_back(d[0]);
  const auto acf = autocorrelation(c0, 5);
  CHECK(std::abs(acf[1]) < 2.5 / std::sqrt(1000.0));

  RngStream rng_b(48);
  const HmcRunResult b = run_chains(std_gauss_logp, std_gauss_grad, cfg, init, rng_b);
  REQUIRE(b.chains.size() == a.chains.size());
  CHECK(b.selected_lag == a.selected_lag);
  for (std::size_t c = 0; c < a.chains.size(); ++c) {
    CHECK((a.chains[c].position - b.chains[c].position).norm() == 0.0);
    REQUIRE(a.chains[c].bank.size() == b.chains[c].bank.size());
    std::size_t mismatched = 0;
    for (std::size_t i = 0; i < a.chains[c].bank.size(); ++i)
      if ((a.chains[c].bank[i] - b.chains[c].bank[i]).norm() != 0.0) ++mismatched;
    CHECK(mismatched == 0);
  }
}

TEST_CASE("run_chains reports failure on a lopsided bimodal target") {
  // Two far-apart modes with different depths: chains stuck in different
  // modes disagree on the log-target level forever.
  const LogTargetFn logp = [](const Eigen::VectorXd& x) {
    const double a = -0.5 * (x[0] + 50.0) * (x[0] + 50.0);
    const double b = -0.5 * (x[0] - 50.0) * (x[0] - 50.0) - 30.0;
    const double m = std::max(a, b);
    return m + std::log(std::exp(a - m) + std::exp(b - m));
  };
  const GradFn grad = [&](const Eigen::VectorXd& x) {
    const double a = -0.5 * (x[0] + 50.0) * (x[0] + 50.0);
    const double b = -0.5 * (x[0] - 50.0) * (x[0] - 50.0) - 30.0;
    const double m = std::max(a, b);
    const double wa = std::exp(a - m), wb = std::exp(b - m);
    Eigen::VectorXd g(1);
    g[0] = (wa * -(x[0] + 50.0) + wb * -(x[0] - 50.0)) / (wa + wb);
    return g;
  };

  HmcConfig cfg;
  cfg.n_chains = 2;
  cfg.convergence_window = 200;
  cfg.trace_capacity = 400;
  cfg.check_interval = 200;
  cfg.max_iterations = 2000;
  cfg.init_step_min = 1e-3;
  cfg.init_step_max = 2e-3;
  cfg.adapt_rounds = 2;

  const ChainInitFn init = [](int chain, RngStream&) {
    Eigen::VectorXd x(1);
    x << (chain % 2 == 0 ? -50.0 : 50.0);
    return x;
  };

  RngStream rng(49);
  CHECK_THROWS_AS(run_chains(logp, grad, cfg, init, rng), ConvergenceError);
}

TEST_CASE("draw_samples allocates round robin at the selected lag") {
  HmcRunResult run;
  for (int c = 0; c < 2; ++c) {
    ChainState st(4);
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd v(1);
      v << c * 100 + i;
      st.bank.push_back(v);
    }
    run.chains.push_back(std::move(st));
  }

  const auto draws = draw_samples(run, 2, 3, 4);
  REQUIRE(draws.size() == 4);
  CHECK(draws[0][0] == 2.0);    // chain 0, bank[2]
  CHECK(draws[1][0] == 102.0);  // chain 1, bank[2]
  CHECK(draws[2][0] == 5.0);    // chain 0, bank[2 + 3]
  CHECK(draws[3][0] == 105.0);  // chain 1, bank[2 + 3]

  CHECK_THROWS_AS(draw_samples(run, 2, 3, 7), ConvergenceError);
}
