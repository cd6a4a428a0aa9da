#ifndef SIMPLEX_EVAL_PROB_DISTRIBUTIONS_HPP
#define SIMPLEX_EVAL_PROB_DISTRIBUTIONS_HPP

#include <Eigen/Dense>
#include <vector>

#include "simplex_eval/rng.hpp"

namespace simplex_eval {

// One Dirichlet draw: per-component Gamma(alpha_k, 1) normalized to sum 1.
// All concentrations must be positive.
std::vector<double> dirichlet_sample(const std::vector<double>& alpha, RngStream& rng);

// What dirichlet_log_pdf does when a component of p is exactly 0 where the
// matching concentration is below 1, i.e. where the density diverges.
enum class BoundaryPolicy { error, neg_inf };

// Natural-log Dirichlet density of p under concentrations alpha.  A zero
// component with alpha_k > 1 gives -inf (density is 0 there); with
// alpha_k < 1 the density diverges and the policy decides between throwing
// InputError and returning -inf.
double dirichlet_log_pdf(const std::vector<double>& alpha, const std::vector<double>& p,
                         BoundaryPolicy policy = BoundaryPolicy::error);

struct DirichletFitOptions {
  double learning_rate = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double adam_eps = 1e-8;
  int max_iterations = 10000;
  double grad_tol = 1e-6;       // on d(loglik)/d(log precision)
  double precision_max = 1e6;
  bool record_trace = false;
};

struct DirichletFitResult {
  std::vector<double> mean;     // fixed to the (clipped) sample mean
  double precision = 0.0;
  bool precision_capped = false;
  int iterations = 0;
  double log_likelihood = 0.0;
  std::vector<double> ll_trace; // filled when record_trace is set
};

// Maximum-likelihood Dirichlet fit with the mean pinned to the sample mean
// (clipped into [1e-6, 1 - 1e-6] and renormalized) and only the precision
// optimized, by ADAM ascent on log-precision.  Each ADAM proposal is
// backtracked until the log-likelihood does not decrease, so the recorded
// trajectory is monotone; the walk stops on grad_tol, a fully backtracked
// step, or max_iterations.  Degenerate data whose likelihood grows without
// bound (e.g. all points identical) caps the precision at precision_max and
// sets precision_capped.  Needs at least two data points.
DirichletFitResult fit_dirichlet_mean_precision(const std::vector<std::vector<double>>& data,
                                                const DirichletFitOptions& opts = {});

// Multivariate normal draw via Cholesky.  Singular covariances get a jitter
// of 1e-12 * trace/D on the diagonal, escalated tenfold up to 1e-6 * trace/D
// before giving up; an all-zero covariance returns mu exactly.
Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                           RngStream& rng);

struct MeanCov {
  Eigen::VectorXd mean;
  Eigen::MatrixXd cov;
};

// Sample mean and covariance with the n-1 denominator.  Needs n >= 2 points
// of equal dimension.
MeanCov estimate_mean_cov(const std::vector<Eigen::VectorXd>& points);

}  // namespace simplex_eval

#endif
