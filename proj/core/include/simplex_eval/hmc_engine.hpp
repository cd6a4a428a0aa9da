#ifndef SIMPLEX_EVAL_HMC_ENGINE_HPP
#define SIMPLEX_EVAL_HMC_ENGINE_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "simplex_eval/rng.hpp"

namespace simplex_eval {

using LogTargetFn = std::function<double(const Eigen::VectorXd&)>;
using GradFn = std::function<Eigen::VectorXd(const Eigen::VectorXd&)>;

struct HmcConfig {
  int leapfrog_steps = 3;
  double target_accept = 0.80;
  int n_chains = 4;

  // Step-size adaptation: after every adapt_round_size accept/reject
  // outcomes, step *= exp(eta0/sqrt(round) * (observed - target)); frozen
  // once adapt_rounds rounds have run.  Chains start at step sizes
  // log-spaced across [init_step_min, init_step_max].
  int adapt_rounds = 100;
  int adapt_round_size = 50;
  double adapt_eta0 = 1.0;
  double init_step_min = 1e-3;
  double init_step_max = 1e-1;

  // Convergence: every check_interval post-adaptation iterations, fit a
  // least-squares slope to the last convergence_window log-target values of
  // each chain.  slope_threshold is quoted at slope_reference_window and is
  // rescaled by reference/window so shrinking the window keeps the criterion
  // comparable.  Cross-chain agreement additionally requires the spread of
  // the window means to stay within cross_chain_tol pooled within-chain
  // standard deviations.
  std::size_t convergence_window = 10000;
  double slope_threshold = 1e-7;
  std::size_t slope_reference_window = 1000000;
  double cross_chain_tol = 3.0;
  std::size_t check_interval = 2500;
  std::size_t max_iterations = 400000;  // post-adaptation cap per chain

  // After convergence each chain keeps running and banks its positions until
  // the bank can serve target_draws thinned draws at the selected lag.
  std::size_t target_draws = 14000;
  std::size_t max_lag = 2000;
  std::size_t trace_capacity = 500000;  // log-target ring buffer bound
};

struct LeapfrogResult {
  Eigen::VectorXd position;
  Eigen::VectorXd momentum;
  Eigen::VectorXd grad;  // gradient at the final position
  bool divergent = false;
};

// n_steps leapfrog steps of the Hamiltonian H(q,p) = -log_target(q) +
// |p|^2 / 2 with identity mass.  Divergent means a non-finite coordinate
// appeared; the partial state is returned with the flag set.
LeapfrogResult leapfrog(const GradFn& grad_fn, const Eigen::VectorXd& position,
                        const Eigen::VectorXd& momentum, double step_size, int n_steps);

// Fixed-capacity scalar ring: keeps the most recent values only.
class ScalarRing {
public:
  explicit ScalarRing(std::size_t capacity);
  void push(double v);
  std::size_t size() const { return count_; }
  std::uint64_t total_pushed() const { return total_; }
  // Most recent m values in time order; m <= size().
  std::vector<double> last(std::size_t m) const;

private:
  std::vector<double> buf_;
  std::size_t head_ = 0;
  std::size_t count_ = 0;
  std::uint64_t total_ = 0;
};

struct ChainState {
  Eigen::VectorXd position;
  double log_target = 0.0;
  Eigen::VectorXd grad;
  double step_size = 0.1;
  bool adaptation_frozen = false;
  int adapt_round = 0;
  int round_accepted = 0;
  int round_attempted = 0;
  std::uint64_t accepted = 0;
  std::uint64_t attempted = 0;
  ScalarRing trace;                    // post-adaptation log-target values
  std::vector<Eigen::VectorXd> bank;   // post-convergence positions

  explicit ChainState(std::size_t trace_capacity) : trace(trace_capacity) {}
};

// One Metropolis-corrected HMC transition.  Fresh standard-normal momentum,
// cfg.leapfrog_steps leapfrog steps at the chain's current step size, accept
// with min(1, exp(-dH)); divergent trajectories always reject.  The current
// log-target value is appended to the trace either way.
bool hmc_step(const LogTargetFn& logp_fn, const GradFn& grad_fn, const HmcConfig& cfg,
              ChainState& state, RngStream& rng);

// Multiplicative step-size update from the finished adaptation round.
// Requires at least min_outcomes recorded outcomes; no-op on frozen chains.
void adapt_step_size(ChainState& state, double target_accept, double eta0,
                     int min_outcomes = 50);

// Normalized autocorrelation of a series at lags 0..max_lag (rho[0] = 1).
std::vector<double> autocorrelation(const std::vector<double>& series, std::size_t max_lag);

// Smallest k >= 1 with |acf[k]| < threshold; ConvergenceError when the acf
// never drops below it.
std::size_t select_lag(const std::vector<double>& acf, double threshold);

struct ConvergenceReport {
  bool converged = false;
  std::vector<double> slopes;        // per chain, over the window
  std::vector<double> window_means;  // per chain
  double pooled_std = 0.0;
  double mean_spread = 0.0;
  double slope_threshold_effective = 0.0;
};

// Applies the windowed-slope and cross-chain tests described on HmcConfig to
// the given per-chain traces.  Chains whose trace is still shorter than the
// window make the report not converged.
ConvergenceReport check_convergence(const std::vector<std::vector<double>>& traces,
                                    std::size_t window, double slope_threshold,
                                    double cross_chain_tol);

using ChainInitFn = std::function<Eigen::VectorXd(int chain_index, RngStream& rng)>;

struct HmcRunResult {
  std::vector<ChainState> chains;
  std::size_t selected_lag = 0;
  std::uint64_t post_adapt_iterations = 0;  // per chain
  ConvergenceReport final_report;
};

// Full protocol: per-chain streams derived from rng, adaptation phase,
// lock-stepped sampling segments until the convergence test passes (error
// with diagnostics after max_iterations), lag selection from the windowed
// autocorrelation, then banking of enough positions for target_draws.
// Chains advance in parallel but each owns a derived stream keyed by its
// index, so the result is identical for any worker count.
HmcRunResult run_chains(const LogTargetFn& logp_fn, const GradFn& grad_fn,
                        const HmcConfig& cfg, const ChainInitFn& init_fn, RngStream& rng);

// Round-robin thinned draws: draw t comes from chain t % n_chains at bank
// position burn_in + (t / n_chains) * lag.  Throws ConvergenceError naming
// the required bank length when a chain is too short.
std::vector<Eigen::VectorXd> draw_samples(const HmcRunResult& run, std::size_t burn_in,
                                          std::size_t lag, std::size_t count);

}  // namespace simplex_eval

#endif
