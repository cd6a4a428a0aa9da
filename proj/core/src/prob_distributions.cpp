#include "simplex_eval/prob_distributions.hpp"

#include <algorithm>
#include <boost/math/special_functions/digamma.hpp>
#include <cmath>
#include <limits>
#include <string>

#include "simplex_eval/errors.hpp"

namespace simplex_eval {

namespace {

constexpr double kMeanClip = 1e-6;
constexpr double kLogFloor = 1e-12;  // floor on data components inside log()

void check_alpha(const std::vector<double>& alpha) {
  if (alpha.size() < 2) throw InputError("dirichlet: need at least 2 concentrations");
  for (std::size_t k = 0; k < alpha.size(); ++k)
    if (!(alpha[k] > 0.0) || !std::isfinite(alpha[k]))
      throw InputError("dirichlet: concentration at index " + std::to_string(k) +
                       " must be positive and finite");
}

}  // namespace

std::vector<double> dirichlet_sample(const std::vector<double>& alpha, RngStream& rng) {
  check_alpha(alpha);
  const std::size_t k = alpha.size();
  std::vector<double> out(k);
  for (int attempt = 0; attempt < 100; ++attempt) {
    double sum = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      out[i] = rng.gamma(alpha[i]);
      sum += out[i];
    }
    if (sum > 1e-290) {
      for (std::size_t i = 0; i < k; ++i) out[i] /= sum;
      return out;
    }
    // All gamma draws underflowed (tiny shapes); try again.
  }
  throw ResamplingError("dirichlet_sample: gamma draws underflowed repeatedly");
}

double dirichlet_log_pdf(const std::vector<double>& alpha, const std::vector<double>& p,
                         BoundaryPolicy policy) {
  check_alpha(alpha);
  if (p.size() != alpha.size())
    throw InputError("dirichlet_log_pdf: point has " + std::to_string(p.size()) +
                     " components, expected " + std::to_string(alpha.size()));
  double alpha_sum = 0.0;
  double log_norm = 0.0;
  double dot = 0.0;
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    alpha_sum += alpha[k];
    log_norm -= std::lgamma(alpha[k]);
    if (p[k] <= 0.0) {
      if (alpha[k] < 1.0) {
        if (policy == BoundaryPolicy::error)
          throw InputError("dirichlet_log_pdf: density diverges at the boundary "
                           "(component " + std::to_string(k) + " is 0 with concentration " +
                           std::to_string(alpha[k]) + " < 1)");
        return -std::numeric_limits<double>::infinity();
      }
      if (alpha[k] > 1.0) return -std::numeric_limits<double>::infinity();
      // alpha_k == 1: the factor p^0 contributes nothing.
    } else {
      dot += (alpha[k] - 1.0) * std::log(p[k]);
    }
  }
  return std::lgamma(alpha_sum) + log_norm + dot;
}

namespace {

// Dirichlet log-likelihood with mean m fixed, as a function of precision s:
//   n lg(s) - n sum_k lg(s m_k) + sum_k (s m_k - 1) T_k,   T_k = sum_i log p_ik
struct PrecisionObjective {
  std::size_t n = 0;
  std::vector<double> mean;
  std::vector<double> log_stats;  // T_k

  double value(double s) const {
    double acc = static_cast<double>(n) * std::lgamma(s);
    for (std::size_t k = 0; k < mean.size(); ++k) {
      acc -= static_cast<double>(n) * std::lgamma(s * mean[k]);
      acc += (s * mean[k] - 1.0) * log_stats[k];
    }
    return acc;
  }

  // Derivative with respect to log-precision.
  double grad_log(double s) const {
    double ds = static_cast<double>(n) * boost::math::digamma(s);
    for (std::size_t k = 0; k < mean.size(); ++k)
      ds += mean[k] * (log_stats[k] -
                       static_cast<double>(n) * boost::math::digamma(s * mean[k]));
    return s * ds;
  }
};

}  // namespace

DirichletFitResult fit_dirichlet_mean_precision(const std::vector<std::vector<double>>& data,
                                                const DirichletFitOptions& opts) {
  if (data.size() < 2)
    throw InputError("fit_dirichlet_mean_precision: need at least 2 data points, got " +
                     std::to_string(data.size()));
  const std::size_t k = data[0].size();
  if (k < 2) throw InputError("fit_dirichlet_mean_precision: points need >= 2 components");

  PrecisionObjective obj;
  obj.n = data.size();
  obj.mean.assign(k, 0.0);
  obj.log_stats.assign(k, 0.0);
  bool all_identical = true;
  for (const auto& p : data) {
    if (p.size() != k)
      throw InputError("fit_dirichlet_mean_precision: inconsistent point dimensions");
    if (p != data[0]) all_identical = false;
    for (std::size_t j = 0; j < k; ++j) {
      obj.mean[j] += p[j];
      obj.log_stats[j] += std::log(std::max(p[j], kLogFloor));
    }
  }
  double mean_sum = 0.0;
  for (std::size_t j = 0; j < k; ++j) {
    obj.mean[j] = std::clamp(obj.mean[j] / static_cast<double>(obj.n), kMeanClip,
                             1.0 - kMeanClip);
    mean_sum += obj.mean[j];
  }
  for (std::size_t j = 0; j < k; ++j) obj.mean[j] /= mean_sum;

  DirichletFitResult res;
  res.mean = obj.mean;

  if (all_identical) {
    res.precision = opts.precision_max;
    res.precision_capped = true;
    res.log_likelihood = obj.value(res.precision);
    return res;
  }

  const double theta_max = std::log(opts.precision_max);
  const double theta_min = std::log(kMeanClip);
  double theta = std::log(static_cast<double>(k));  // neutral start: precision = K
  double ll = obj.value(std::exp(theta));
  double m = 0.0, v = 0.0;
  if (opts.record_trace) res.ll_trace.push_back(ll);

  int t = 0;
  for (; t < opts.max_iterations; ++t) {
    const double g = obj.grad_log(std::exp(theta));
    if (std::abs(g) < opts.grad_tol) break;
    m = opts.beta1 * m + (1.0 - opts.beta1) * g;
    v = opts.beta2 * v + (1.0 - opts.beta2) * g * g;
    const double m_hat = m / (1.0 - std::pow(opts.beta1, t + 1));
    const double v_hat = v / (1.0 - std::pow(opts.beta2, t + 1));
    double step = opts.learning_rate * m_hat / (std::sqrt(v_hat) + opts.adam_eps);

    // Backtrack the proposal until the log-likelihood does not drop; this
    // keeps the recorded trajectory monotone and doubles as the stopping
    // test at a local maximum.
    bool accepted = false;
    bool moved = false;
    for (int half = 0; half < 40; ++half) {
      const double cand = std::clamp(theta + step, theta_min, theta_max);
      const double cand_ll = obj.value(std::exp(cand));
      if (cand_ll >= ll) {
        moved = (cand != theta);
        theta = cand;
        ll = cand_ll;
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (opts.record_trace) res.ll_trace.push_back(ll);
    if (!accepted || !moved) break;  // local maximum or pinned at a bound
  }

  res.precision = std::exp(theta);
  res.iterations = t;
  res.log_likelihood = ll;
  if (res.precision >= opts.precision_max * (1.0 - 1e-12)) {
    res.precision = opts.precision_max;
    res.precision_capped = true;
  }
  return res;
}

Eigen::VectorXd mvn_sample(const Eigen::VectorXd& mu, const Eigen::MatrixXd& cov,
                           RngStream& rng) {
  const Eigen::Index d = mu.size();
  if (cov.rows() != d || cov.cols() != d)
    throw InputError("mvn_sample: covariance shape does not match mean dimension");

  const double trace = cov.trace();
  if (!(trace >= 0.0) || !cov.allFinite())
    throw InputError("mvn_sample: covariance has negative or non-finite diagonal mass");

  if (trace == 0.0) {
    if (cov.cwiseAbs().maxCoeff() > 0.0)
      throw InputError("mvn_sample: zero-trace covariance with off-diagonal mass");
    return mu;  // degenerate point mass
  }

  const double base = 1e-12 * trace / static_cast<double>(d);
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;
  for (int attempt = 0; attempt < 8; ++attempt) {
    llt.compute(cov + jitter * Eigen::MatrixXd::Identity(d, d));
    if (llt.info() == Eigen::Success) break;
    jitter = (jitter == 0.0) ? base : jitter * 10.0;
    if (jitter > 1e-6 * trace / static_cast<double>(d) * 1.0000001)
      throw InputError("mvn_sample: covariance is not positive semidefinite "
                       "(Cholesky failed at maximum jitter)");
  }
  if (llt.info() != Eigen::Success)
    throw InputError("mvn_sample: covariance is not positive semidefinite");

  Eigen::VectorXd z(d);
  for (Eigen::Index i = 0; i < d; ++i) z[i] = rng.normal();
  return mu + llt.matrixL() * z;
}

MeanCov estimate_mean_cov(const std::vector<Eigen::VectorXd>& points) {
  if (points.size() < 2)
    throw InputError("estimate_mean_cov: need at least 2 points, got " +
                     std::to_string(points.size()));
  const Eigen::Index d = points[0].size();
  MeanCov out;
  out.mean = Eigen::VectorXd::Zero(d);
  for (const auto& p : points) {
    if (p.size() != d) throw InputError("estimate_mean_cov: inconsistent point dimensions");
    out.mean += p;
  }
  out.mean /= static_cast<double>(points.size());
  out.cov = Eigen::MatrixXd::Zero(d, d);
  for (const auto& p : points) {
    const Eigen::VectorXd diff = p - out.mean;
    out.cov += diff * diff.transpose();
  }
  out.cov /= static_cast<double>(points.size() - 1);
  return out;
}

}  // namespace simplex_eval
