#ifndef SIMPLEX_EVAL_BNN_EVALUATOR_HPP
#define SIMPLEX_EVAL_BNN_EVALUATOR_HPP

#include <Eigen/Dense>
#include <cstddef>
#include <vector>

#include "simplex_eval/evaluators.hpp"
#include "simplex_eval/hmc_engine.hpp"
#include "simplex_eval/simplex_geometry.hpp"

namespace simplex_eval {

struct BnnConfig {
  int k = 0;             // class count; 0 = take from the data at fit time
  int hidden_units = 0;  // 0 = default K-1
  double sigma2 = 0.1;   // Gaussian difference-likelihood variance
  double box_bound = 0;  // optional proper prior: |weight| <= bound; 0 = flat
};

// The network y -> softmax(from_reduced(W2 sigmoid(W1 to_reduced(y) + b1)
// + b2)) with its rotation fixed at construction.  Weights travel as one
// flat vector psi laid out W1 ((K-1) x H, row-major), b1, W2 (H x (K-1),
// row-major), b2.
class BnnNetwork {
public:
  BnnNetwork(int k, int hidden_units);  // hidden_units 0 = K-1

  int k() const { return k_; }
  int hidden() const { return h_; }
  int param_count() const { return dim_; }
  const SimplexRotation& rotation() const { return rot_; }

  // Labels stacked as rows of reduced coordinates, n x (K-1).
  Eigen::MatrixXd reduce_labels(const std::vector<ProbVec>& labels) const;

  // Forward pass over a batch of reduced labels; returns n x K softmax rows.
  Eigen::MatrixXd forward_batch(const Eigen::VectorXd& psi, const Eigen::MatrixXd& z) const;

  // Single-label convenience wrapper.
  std::vector<double> forward(const Eigen::VectorXd& psi, const ProbVec& y) const;

private:
  int k_;
  int h_;
  int dim_;
  SimplexRotation rot_;
};

int bnn_param_count(int k, int hidden_units);

// Sum over pairs of log N(net(y_i; psi) - yhat_i; 0, sigma2 I_K), flat
// (zero) log-prior; -inf outside the optional box bound.  z holds reduced
// labels (n x (K-1)), yhat the raw targets (n x K).
double bnn_log_target(const BnnNetwork& net, double sigma2, const Eigen::MatrixXd& z,
                      const Eigen::MatrixXd& yhat, const Eigen::VectorXd& psi,
                      double box_bound = 0);

// Analytic reverse-mode gradient of bnn_log_target in psi.
Eigen::VectorXd bnn_grad_log_target(const BnnNetwork& net, double sigma2,
                                    const Eigen::MatrixXd& z, const Eigen::MatrixXd& yhat,
                                    const Eigen::VectorXd& psi);

// Evaluator wrapper: fit runs the HMC protocol on the pair dataset and keeps
// a bank of thinned posterior weight draws (burn-in of one lag, then spaced
// by the selected lag, round-robin across chains); sample feeds each label
// through the first B banked weight sets.  Requesting more draws than the
// bank holds is an error naming the required chain length.
class BnnEvaluator final : public Evaluator {
public:
  BnnEvaluator(BnnConfig cfg, HmcConfig hmc);
  // Restores a fitted state (model loading).
  BnnEvaluator(BnnConfig cfg, std::vector<Eigen::VectorXd> draws,
               nlohmann::ordered_json diagnostics);

  EvaluatorKind kind() const override { return EvaluatorKind::bnn; }
  std::size_t k() const override { return cfg_.k > 0 ? static_cast<std::size_t>(cfg_.k) : 0; }
  bool fitted() const override { return !draws_.empty(); }
  void fit(const PairedDataset& pairs, RngStream& rng) override;
  EvaluatorSamples sample(const std::vector<ProbVec>& labels, std::size_t b,
                          RngStream& rng) const override;
  nlohmann::ordered_json describe() const override;

  const BnnConfig& config() const { return cfg_; }
  const std::vector<Eigen::VectorXd>& draws() const { return draws_; }
  const nlohmann::ordered_json& diagnostics() const { return diagnostics_; }

private:
  BnnConfig cfg_;
  HmcConfig hmc_;
  std::vector<Eigen::VectorXd> draws_;
  nlohmann::ordered_json diagnostics_;
};

}  // namespace simplex_eval

#endif
