#ifndef SIMPLEX_EVAL_EVALUATORS_HPP
#define SIMPLEX_EVAL_EVALUATORS_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simplex_eval/evaluator_samples.hpp"
#include "simplex_eval/paired_data.hpp"
#include "simplex_eval/prob_distributions.hpp"
#include "simplex_eval/rng.hpp"
#include "simplex_eval/simplex_geometry.hpp"

namespace simplex_eval {

enum class EvaluatorKind { uniform_dirichlet, mle_dirichlet, ndod, ndod_zero_mean, bnn };

// CLI-facing names: uniform, mle-dirichlet, ndod, ndod-zero, bnn.
const char* evaluator_kind_name(EvaluatorKind kind);
EvaluatorKind evaluator_kind_from_name(const std::string& name);

// Common contract for the Bayesian evaluators of P(yhat | y).  fit consumes
// labelled pairs; sample produces B draws per label as an (N, B, K) tensor.
// Both are deterministic given data and the rng seed; sample derives one
// sub-stream per label so thread count never changes the output.
class Evaluator {
public:
  virtual ~Evaluator() = default;
  virtual EvaluatorKind kind() const = 0;
  virtual std::size_t k() const = 0;  // 0 before fit
  virtual bool fitted() const = 0;
  virtual void fit(const PairedDataset& pairs, RngStream& rng) = 0;
  virtual EvaluatorSamples sample(const std::vector<ProbVec>& labels, std::size_t b,
                                  RngStream& rng) const = 0;
  // Fitted-parameter / diagnostic summary for reports and model headers.
  virtual nlohmann::ordered_json describe() const = 0;
};

// Baseline: every draw ~ Dirichlet(1, ..., 1), label ignored.
class UniformDirichletEvaluator final : public Evaluator {
public:
  explicit UniformDirichletEvaluator(std::size_t k = 0) : k_(k) {}
  EvaluatorKind kind() const override { return EvaluatorKind::uniform_dirichlet; }
  std::size_t k() const override { return k_; }
  bool fitted() const override { return k_ >= 2; }
  void fit(const PairedDataset& pairs, RngStream& rng) override;
  EvaluatorSamples sample(const std::vector<ProbVec>& labels, std::size_t b,
                          RngStream& rng) const override;
  nlohmann::ordered_json describe() const override;

private:
  std::size_t k_;
};

// Baseline: Dirichlet fitted to the prediction cloud by mean + precision,
// label ignored.
class MleDirichletEvaluator final : public Evaluator {
public:
  explicit MleDirichletEvaluator(DirichletFitOptions opts = {}) : opts_(opts) {}
  // Restores a fitted state (model loading).
  MleDirichletEvaluator(std::vector<double> mean, double precision, bool capped);

  EvaluatorKind kind() const override { return EvaluatorKind::mle_dirichlet; }
  std::size_t k() const override { return mean_.size(); }
  bool fitted() const override { return !mean_.empty(); }
  void fit(const PairedDataset& pairs, RngStream& rng) override;
  EvaluatorSamples sample(const std::vector<ProbVec>& labels, std::size_t b,
                          RngStream& rng) const override;
  nlohmann::ordered_json describe() const override;

  const std::vector<double>& mean() const { return mean_; }
  double precision() const { return precision_; }
  bool precision_capped() const { return capped_; }

private:
  DirichletFitOptions opts_;
  std::vector<double> mean_;
  double precision_ = 0.0;
  bool capped_ = false;
};

// Normal Distribution over the Differences: yhat = y + N(mu, cov) in the
// reduced space, rejection-resampled until the K-space point is on the
// simplex.  The zero-mean variant pins mu = 0 and estimates cov as the
// second moment about zero with the n-1 denominator.
class NdodEvaluator final : public Evaluator {
public:
  explicit NdodEvaluator(bool zero_mean, std::size_t max_attempts = 10000)
      : zero_mean_(zero_mean), max_attempts_(max_attempts) {}
  // Restores a fitted state (model loading).
  NdodEvaluator(std::size_t k, Eigen::VectorXd mu, Eigen::MatrixXd cov, bool zero_mean,
                std::size_t max_attempts);

  EvaluatorKind kind() const override {
    return zero_mean_ ? EvaluatorKind::ndod_zero_mean : EvaluatorKind::ndod;
  }
  std::size_t k() const override { return k_; }
  bool fitted() const override { return k_ >= 2; }
  void fit(const PairedDataset& pairs, RngStream& rng) override;
  EvaluatorSamples sample(const std::vector<ProbVec>& labels, std::size_t b,
                          RngStream& rng) const override;
  nlohmann::ordered_json describe() const override;

  const Eigen::VectorXd& mu() const { return mu_; }
  const Eigen::MatrixXd& cov() const { return cov_; }
  bool zero_mean() const { return zero_mean_; }
  std::size_t max_attempts() const { return max_attempts_; }

private:
  bool zero_mean_;
  std::size_t max_attempts_;
  std::size_t k_ = 0;
  SimplexRotation rot_;
  Eigen::VectorXd mu_;
  Eigen::MatrixXd cov_;
};

// Model files: magic SEVM0001, uint64 header length, JSON header, then a raw
// little-endian float64 payload owned by the evaluator kind.
void save_model(const std::string& path, const Evaluator& evaluator);
std::unique_ptr<Evaluator> load_model(const std::string& path);

}  // namespace simplex_eval

#endif
