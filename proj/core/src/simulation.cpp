#include "simplex_eval/simulation.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <cstdio>

#include "simplex_eval/errors.hpp"
#include "simplex_eval/parallel.hpp"
#include "simplex_eval/prob_distributions.hpp"

namespace simplex_eval {

namespace {

constexpr std::uint64_t kLabelTag = 0x4c41424c;
constexpr std::uint64_t kPairTag = 0x50414952;

void check_alpha(const std::vector<double>& alpha) {
  if (alpha.size() < 2)
    throw InputError("simulation needs at least 2 concentrations, got " +
                     std::to_string(alpha.size()));
  for (double a : alpha)
    if (!(a > 0)) throw InputError("concentrations must be positive");
}

ProbVec snap(const Eigen::VectorXd& p) {
  std::vector<double> v(static_cast<std::size_t>(p.size()));
  double sum = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    v[static_cast<std::size_t>(c)] = p[c] < 0.0 ? 0.0 : p[c];
    sum += v[static_cast<std::size_t>(c)];
  }
  for (double& x : v) x /= sum;
  return ProbVec(std::move(v));
}

}  // namespace

std::vector<ProbVec> simulate_labels(const std::vector<double>& alpha, std::size_t n,
                                     RngStream& rng) {
  check_alpha(alpha);
  std::vector<ProbVec> out(n);
  const RngStream base(rng.next_u64());
  parallel_for(n, [&](std::size_t i) {
    RngStream s = base.derive(kLabelTag, i);
    out[i] = ProbVec(dirichlet_sample(alpha, s));
  });
  return out;
}

ProbVec noisy_prediction(const ProbVec& y, double noise_var, std::size_t max_attempts,
                         RngStream& rng) {
  if (!(noise_var > 0)) throw InputError("noise variance must be positive");
  const double sigma = std::sqrt(noise_var);
  const Eigen::Index k = static_cast<Eigen::Index>(y.size());
  Eigen::VectorXd eps(k);
  for (std::size_t attempt = 0; attempt < max_attempts; ++attempt) {
    for (Eigen::Index c = 0; c < k; ++c) eps[c] = sigma * rng.normal();
    eps.array() -= eps.mean();
    const Eigen::VectorXd cand = y.as_eigen() + eps;
    if (is_in_simplex(cand, 1e-9)) return snap(cand);
  }
  throw ResamplingError("noise resampling exhausted " + std::to_string(max_attempts) +
                        " attempts (noise_var " + std::to_string(noise_var) + ")");
}

PairedDataset simulate_dataset(const SimConfig& cfg, RngStream& rng) {
  check_alpha(cfg.alpha);
  if (cfg.n_train + cfg.n_test == 0) throw InputError("simulation needs at least 1 sample");

  PairedDataset out;
  out.k = cfg.alpha.size();
  const std::size_t n = cfg.n_train + cfg.n_test;
  out.rows.resize(n);
  const RngStream base(rng.next_u64());
  parallel_for(n, [&](std::size_t i) {
    RngStream s = base.derive(kPairTag, i);
    PairRow& row = out.rows[i];
    char id[32];
    std::snprintf(id, sizeof id, "sim-%06zu", i);
    row.sample_id = id;
    row.split = i < cfg.n_train ? "train" : "test";
    row.y = ProbVec(dirichlet_sample(cfg.alpha, s));
    try {
      row.yhat = noisy_prediction(row.y, cfg.noise_var, cfg.max_attempts, s);
    } catch (const ResamplingError&) {
      throw ResamplingError("noise resampling exhausted " + std::to_string(cfg.max_attempts) +
                            " attempts for sample " + row.sample_id);
    }
  });
  return out;
}

}  // namespace simplex_eval
