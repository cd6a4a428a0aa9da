#include "simplex_eval/hmc_engine.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "simplex_eval/errors.hpp"
#include "simplex_eval/parallel.hpp"

namespace simplex_eval {

LeapfrogResult leapfrog(const GradFn& grad_fn, const Eigen::VectorXd& position,
                        const Eigen::VectorXd& momentum, double step_size, int n_steps) {
  LeapfrogResult res;
  res.position = position;
  res.momentum = momentum;
  res.grad = grad_fn(res.position);

  auto finite = [](const Eigen::VectorXd& v) { return v.allFinite(); };
  if (!finite(res.grad)) {
    res.divergent = true;
    return res;
  }

  res.momentum += 0.5 * step_size * res.grad;
  for (int s = 0; s < n_steps; ++s) {
    res.position += step_size * res.momentum;
    if (!finite(res.position)) {
      res.divergent = true;
      return res;
    }
    res.grad = grad_fn(res.position);
    if (!finite(res.grad)) {
      res.divergent = true;
      return res;
    }
    const double kick = (s + 1 == n_steps) ? 0.5 : 1.0;
    res.momentum += kick * step_size * res.grad;
    if (!finite(res.momentum)) {
      res.divergent = true;
      return res;
    }
  }
  return res;
}

ScalarRing::ScalarRing(std::size_t capacity) : buf_(std::max<std::size_t>(capacity, 1)) {}

void ScalarRing::push(double v) {
  buf_[head_] = v;
  head_ = (head_ + 1) % buf_.size();
  count_ = std::min(count_ + 1, buf_.size());
  ++total_;
}

std::vector<double> ScalarRing::last(std::size_t m) const {
  m = std::min(m, count_);
  std::vector<double> out(m);
  // head_ points at the slot after the most recent value.
  for (std::size_t i = 0; i < m; ++i) {
    const std::size_t idx = (head_ + buf_.size() - m + i) % buf_.size();
    out[i] = buf_[idx];
  }
  return out;
}

bool hmc_step(const LogTargetFn& logp_fn, const GradFn& grad_fn, const HmcConfig& cfg,
              ChainState& state, RngStream& rng) {
  const Eigen::Index d = state.position.size();
  Eigen::VectorXd p0(d);
  for (Eigen::Index i = 0; i < d; ++i) p0[i] = rng.normal();

  const double h0 = -state.log_target + 0.5 * p0.squaredNorm();
  const LeapfrogResult prop =
      leapfrog(grad_fn, state.position, p0, state.step_size, cfg.leapfrog_steps);

  bool accepted = false;
  if (!prop.divergent) {
    const double logp1 = logp_fn(prop.position);
    if (std::isfinite(logp1)) {
      const double h1 = -logp1 + 0.5 * prop.momentum.squaredNorm();
      const double log_u = std::log(rng.uniform_pos());
      if (log_u < h0 - h1) {
        state.position = prop.position;
        state.log_target = logp1;
        state.grad = prop.grad;
        accepted = true;
      }
    }
  }

  ++state.attempted;
  ++state.round_attempted;
  if (accepted) {
    ++state.accepted;
    ++state.round_accepted;
  }
  state.trace.push(state.log_target);
  return accepted;
}

void adapt_step_size(ChainState& state, double target_accept, double eta0,
                     int min_outcomes) {
  if (state.adaptation_frozen) return;
  if (state.round_attempted < min_outcomes)
    throw InputError("adapt_step_size: only " + std::to_string(state.round_attempted) +
                     " outcomes recorded, need " + std::to_string(min_outcomes));
  const double observed =
      static_cast<double>(state.round_accepted) / static_cast<double>(state.round_attempted);
  ++state.adapt_round;
  const double eta = eta0 / std::sqrt(static_cast<double>(state.adapt_round));
  state.step_size *= std::exp(eta * (observed - target_accept));
  state.round_accepted = 0;
  state.round_attempted = 0;
}

std::vector<double> autocorrelation(const std::vector<double>& series, std::size_t max_lag) {
  const std::size_t n = series.size();
  if (n < 2) throw InputError("autocorrelation: series too short");
  max_lag = std::min(max_lag, n - 1);

  double mean = 0.0;
  for (double v : series) mean += v;
  mean /= static_cast<double>(n);

  double var = 0.0;
  for (double v : series) var += (v - mean) * (v - mean);

  std::vector<double> acf(max_lag + 1, 0.0);
  acf[0] = 1.0;
  if (var <= 0.0) return acf;  // constant series: no correlation structure

  for (std::size_t k = 1; k <= max_lag; ++k) {
    double acc = 0.0;
    for (std::size_t t = 0; t + k < n; ++t)
      acc += (series[t] - mean) * (series[t + k] - mean);
    acf[k] = acc / var;
  }
  return acf;
}

std::size_t select_lag(const std::vector<double>& acf, double threshold) {
  for (std::size_t k = 1; k < acf.size(); ++k)
    if (std::abs(acf[k]) < threshold) return k;
  throw ConvergenceError("select_lag: autocorrelation stays above " +
                         std::to_string(threshold) + " for all " +
                         std::to_string(acf.size() - 1) + " lags");
}

ConvergenceReport check_convergence(const std::vector<std::vector<double>>& traces,
                                    std::size_t window, double slope_threshold,
                                    double cross_chain_tol) {
  ConvergenceReport rep;
  rep.slope_threshold_effective = slope_threshold;
  if (traces.empty() || window < 2) return rep;

  bool slopes_ok = true;
  double pooled_var = 0.0;
  for (const auto& trace : traces) {
    if (trace.size() < window) return rep;  // not enough history yet
    const std::size_t off = trace.size() - window;
    const double w = static_cast<double>(window);

    double mean = 0.0;
    for (std::size_t t = 0; t < window; ++t) mean += trace[off + t];
    mean /= w;

    // Least squares against the centered index; t_bar = (w-1)/2,
    // sum (t - t_bar)^2 = w(w^2 - 1)/12.
    const double t_bar = 0.5 * (w - 1.0);
    double cov = 0.0, var = 0.0;
    for (std::size_t t = 0; t < window; ++t) {
      const double dt = static_cast<double>(t) - t_bar;
      const double dx = trace[off + t] - mean;
      cov += dt * dx;
      var += dx * dx;
    }
    const double slope = cov / (w * (w * w - 1.0) / 12.0);

    rep.slopes.push_back(slope);
    rep.window_means.push_back(mean);
    pooled_var += var / (w - 1.0);
    if (std::abs(slope) >= slope_threshold) slopes_ok = false;
  }

  rep.pooled_std = std::sqrt(pooled_var / static_cast<double>(traces.size()));
  const auto [lo, hi] = std::minmax_element(rep.window_means.begin(), rep.window_means.end());
  rep.mean_spread = *hi - *lo;

  rep.converged = slopes_ok && rep.mean_spread <= cross_chain_tol * rep.pooled_std;
  return rep;
}

namespace {

std::size_t draws_for_chain(std::size_t count, int n_chains, int chain) {
  const std::size_t base = count / static_cast<std::size_t>(n_chains);
  const std::size_t rem = count % static_cast<std::size_t>(n_chains);
  return base + (static_cast<std::size_t>(chain) < rem ? 1 : 0);
}

}  // namespace

HmcRunResult run_chains(const LogTargetFn& logp_fn, const GradFn& grad_fn,
                        const HmcConfig& cfg, const ChainInitFn& init_fn, RngStream& rng) {
  if (cfg.n_chains < 1) throw InputError("run_chains: need at least one chain");
  if (cfg.leapfrog_steps < 1) throw InputError("run_chains: need at least one leapfrog step");
  if (cfg.convergence_window < 2 || cfg.convergence_window > cfg.trace_capacity)
    throw InputError("run_chains: convergence window must fit the trace capacity");

  const double effective_slope_threshold =
      cfg.slope_threshold * static_cast<double>(cfg.slope_reference_window) /
      static_cast<double>(cfg.convergence_window);

  HmcRunResult run;
  std::vector<RngStream> streams;
  streams.reserve(cfg.n_chains);
  for (int c = 0; c < cfg.n_chains; ++c) {
    streams.push_back(rng.derive(0x9c41u, static_cast<std::uint64_t>(c)));
    ChainState state(cfg.trace_capacity);
    state.position = init_fn(c, streams.back());
    state.log_target = logp_fn(state.position);
    if (!std::isfinite(state.log_target))
      throw InputError("run_chains: chain " + std::to_string(c) +
                       " starts at a non-finite log target");
    state.grad = grad_fn(state.position);
    // Spread the initial step sizes geometrically across the chains.
    const double f = cfg.n_chains == 1
                         ? 0.5
                         : static_cast<double>(c) / static_cast<double>(cfg.n_chains - 1);
    state.step_size = cfg.init_step_min *
                      std::pow(cfg.init_step_max / cfg.init_step_min, f);
    run.chains.push_back(std::move(state));
  }

  auto advance = [&](ChainState& state, RngStream& stream, std::size_t iters, bool adapt) {
    for (std::size_t i = 0; i < iters; ++i) {
      hmc_step(logp_fn, grad_fn, cfg, state, stream);
      if (adapt && state.round_attempted >= cfg.adapt_round_size)
        adapt_step_size(state, cfg.target_accept, cfg.adapt_eta0, cfg.adapt_round_size);
    }
  };

  // Adaptation phase.  The trace entries recorded here are discarded by
  // restarting the ring afterwards, so convergence windows and the
  // autocorrelation only ever see frozen-step samples.
  const std::size_t adapt_iters = static_cast<std::size_t>(cfg.adapt_rounds) *
                                  static_cast<std::size_t>(cfg.adapt_round_size);
  parallel_for(run.chains.size(), [&](std::size_t c) {
    advance(run.chains[c], streams[c], adapt_iters, true);
    run.chains[c].adaptation_frozen = true;
    run.chains[c].trace = ScalarRing(cfg.trace_capacity);
  });

  // Sampling phase: lock-stepped segments, convergence test after each.
  std::size_t done = 0;
  ConvergenceReport report;
  while (true) {
    const std::size_t segment = std::min(cfg.check_interval, cfg.max_iterations - done);
    if (segment == 0) break;
    parallel_for(run.chains.size(),
                 [&](std::size_t c) { advance(run.chains[c], streams[c], segment, false); });
    done += segment;

    std::vector<std::vector<double>> windows;
    windows.reserve(run.chains.size());
    for (const auto& chain : run.chains)
      windows.push_back(chain.trace.last(cfg.convergence_window));
    report = check_convergence(windows, cfg.convergence_window, effective_slope_threshold,
                               cfg.cross_chain_tol);
    if (report.converged) break;
  }
  if (!report.converged) {
    std::ostringstream msg;
    msg << "run_chains: no convergence after " << done << " post-adaptation iterations"
        << " (effective slope threshold " << effective_slope_threshold;
    if (!report.slopes.empty()) {
      msg << "; slopes";
      for (double s : report.slopes) msg << " " << s;
      msg << "; mean spread " << report.mean_spread << " vs " << cfg.cross_chain_tol
          << " * pooled std " << report.pooled_std;
    }
    msg << ")";
    throw ConvergenceError(msg.str());
  }

  // Lag from the converged window, conservatively the worst chain.
  const double acf_threshold = 2.0 / std::sqrt(static_cast<double>(cfg.convergence_window));
  std::size_t lag = 1;
  for (const auto& chain : run.chains) {
    const std::vector<double> window = chain.trace.last(cfg.convergence_window);
    const std::vector<double> acf = autocorrelation(window, cfg.max_lag);
    lag = std::max(lag, select_lag(acf, acf_threshold));
  }
  run.selected_lag = lag;

  // Banking phase: one lag interval of burn-in, then enough positions for
  // target_draws round-robin thinned draws.
  std::size_t max_needed = 0;
  for (int c = 0; c < cfg.n_chains; ++c) {
    const std::size_t per_chain = draws_for_chain(cfg.target_draws, cfg.n_chains, c);
    if (per_chain == 0) continue;
    max_needed = std::max(max_needed, lag + (per_chain - 1) * lag + 1);
  }
  parallel_for(run.chains.size(), [&](std::size_t c) {
    ChainState& chain = run.chains[c];
    chain.bank.reserve(max_needed);
    while (chain.bank.size() < max_needed) {
      hmc_step(logp_fn, grad_fn, cfg, chain, streams[c]);
      chain.bank.push_back(chain.position);
    }
  });

  run.post_adapt_iterations = done + max_needed;
  run.final_report = report;
  return run;
}

std::vector<Eigen::VectorXd> draw_samples(const HmcRunResult& run, std::size_t burn_in,
                                          std::size_t lag, std::size_t count) {
  if (lag < 1) throw InputError("draw_samples: lag must be >= 1");
  if (run.chains.empty()) throw InputError("draw_samples: no chains");
  const int n_chains = static_cast<int>(run.chains.size());

  for (int c = 0; c < n_chains; ++c) {
    const std::size_t per_chain = draws_for_chain(count, n_chains, c);
    if (per_chain == 0) continue;
    const std::size_t needed = burn_in + (per_chain - 1) * lag + 1;
    if (run.chains[c].bank.size() < needed)
      throw ConvergenceError("draw_samples: chain " + std::to_string(c) + " holds " +
                             std::to_string(run.chains[c].bank.size()) +
                             " positions but " + std::to_string(needed) +
                             " are required; extend the run by " +
                             std::to_string(needed - run.chains[c].bank.size()) +
                             " iterations");
  }

  std::vector<Eigen::VectorXd> draws;
  draws.reserve(count);
  for (std::size_t t = 0; t < count; ++t) {
    const int c = static_cast<int>(t % static_cast<std::size_t>(n_chains));
    const std::size_t j = t / static_cast<std::size_t>(n_chains);
    draws.push_back(run.chains[c].bank[burn_in + j * lag]);
  }
  return draws;
}

}  // namespace simplex_eval
