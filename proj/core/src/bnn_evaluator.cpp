#include "simplex_eval/bnn_evaluator.hpp"

#include <cmath>
#include <limits>
#include <utility>

#include "simplex_eval/errors.hpp"
#include "simplex_eval/parallel.hpp"

namespace simplex_eval {

namespace {

using RowMajorMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapW = Eigen::Map<const RowMajorMat>;
using MapWMut = Eigen::Map<RowMajorMat>;
using MapV = Eigen::Map<const Eigen::VectorXd>;
using MapVMut = Eigen::Map<Eigen::VectorXd>;

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

int resolve_hidden(int k, int hidden_units) { return hidden_units > 0 ? hidden_units : k - 1; }

}  // namespace

int bnn_param_count(int k, int hidden_units) {
  const int h = resolve_hidden(k, hidden_units);
  const int r = k - 1;
  return r * h + h + h * r + r;
}

BnnNetwork::BnnNetwork(int k, int hidden_units)
    : k_(k), h_(resolve_hidden(k, hidden_units)), dim_(bnn_param_count(k, hidden_units)),
      rot_(build_rotation(k)) {
  if (k < 2) throw InputError("bnn needs k >= 2, got " + std::to_string(k));
  if (h_ < 1) throw InputError("bnn needs at least 1 hidden unit");
}

Eigen::MatrixXd BnnNetwork::reduce_labels(const std::vector<ProbVec>& labels) const {
  Eigen::MatrixXd z(labels.size(), k_ - 1);
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != static_cast<std::size_t>(k_))
      throw InputError("label " + std::to_string(i) + " has dimension " +
                       std::to_string(labels[i].size()) + ", network has k=" +
                       std::to_string(k_));
    z.row(static_cast<Eigen::Index>(i)) = to_reduced(rot_, labels[i]).transpose();
  }
  return z;
}

Eigen::MatrixXd BnnNetwork::forward_batch(const Eigen::VectorXd& psi,
                                          const Eigen::MatrixXd& z) const {
  if (psi.size() != dim_)
    throw InvariantError("weight vector has " + std::to_string(psi.size()) +
                         " entries, network has " + std::to_string(dim_));
  const int r = k_ - 1;
  const MapW w1(psi.data(), r, h_);
  const MapV b1(psi.data() + r * h_, h_);
  const MapW w2(psi.data() + r * h_ + h_, h_, r);
  const MapV b2(psi.data() + r * h_ + h_ + h_ * r, r);

  Eigen::MatrixXd hm = ((z * w1).rowwise() + b1.transpose())
                           .unaryExpr([](double x) { return sigmoid(x); });
  Eigen::MatrixXd u = (hm * w2).rowwise() + b2.transpose();

  // Back to K-space along the affine hull, then a row-wise stable softmax.
  Eigen::MatrixXd v =
      (u * rot_.q.leftCols(r).transpose()).rowwise() + rot_.anchor.transpose();
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double m = v.row(i).maxCoeff();
    out.row(i) = (v.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

std::vector<double> BnnNetwork::forward(const Eigen::VectorXd& psi, const ProbVec& y) const {
  const Eigen::MatrixXd z = reduce_labels({y});
  const Eigen::MatrixXd out = forward_batch(psi, z);
  return std::vector<double>(out.data(), out.data() + out.cols());
}

double bnn_log_target(const BnnNetwork& net, double sigma2, const Eigen::MatrixXd& z,
                      const Eigen::MatrixXd& yhat, const Eigen::VectorXd& psi,
                      double box_bound) {
  if (box_bound > 0 && psi.lpNorm<Eigen::Infinity>() > box_bound)
    return -std::numeric_limits<double>::infinity();
  const Eigen::MatrixXd out = net.forward_batch(psi, z);
  const double rss = (out - yhat).squaredNorm();
  const double n = static_cast<double>(z.rows());
  return -0.5 * rss / sigma2 -
         n * 0.5 * static_cast<double>(net.k()) * std::log(2.0 * M_PI * sigma2);
}

Eigen::VectorXd bnn_grad_log_target(const BnnNetwork& net, double sigma2,
                                    const Eigen::MatrixXd& z, const Eigen::MatrixXd& yhat,
                                    const Eigen::VectorXd& psi) {
  const int r = net.k() - 1;
  const int h = net.hidden();
  const MapW w1(psi.data(), r, h);
  const MapV b1(psi.data() + r * h, h);
  const MapW w2(psi.data() + r * h + h, h, r);
  const MapV b2(psi.data() + r * h + h + h * r, r);
  const Eigen::MatrixXd ql = net.rotation().q.leftCols(r);

  // Forward, keeping the intermediates the backward pass reuses.
  Eigen::MatrixXd hm = ((z * w1).rowwise() + b1.transpose())
                           .unaryExpr([](double x) { return sigmoid(x); });
  Eigen::MatrixXd u = (hm * w2).rowwise() + b2.transpose();
  Eigen::MatrixXd v = (u * ql.transpose()).rowwise() + net.rotation().anchor.transpose();
  Eigen::MatrixXd out(v.rows(), v.cols());
  for (Eigen::Index i = 0; i < v.rows(); ++i) {
    const double m = v.row(i).maxCoeff();
    out.row(i) = (v.row(i).array() - m).exp();
    out.row(i) /= out.row(i).sum();
  }

  const Eigen::MatrixXd g_out = (yhat - out) / sigma2;  // d logp / d out
  const Eigen::VectorXd rowdot = (g_out.cwiseProduct(out)).rowwise().sum();
  const Eigen::MatrixXd g_v = out.cwiseProduct(g_out.colwise() - rowdot);
  const Eigen::MatrixXd g_u = g_v * ql;
  const Eigen::MatrixXd g_h = g_u * w2.transpose();
  const Eigen::MatrixXd g_a = g_h.cwiseProduct(hm.cwiseProduct((1.0 - hm.array()).matrix()));

  Eigen::VectorXd grad(net.param_count());
  MapWMut(grad.data(), r, h) = z.transpose() * g_a;
  MapVMut(grad.data() + r * h, h) = g_a.colwise().sum();
  MapWMut(grad.data() + r * h + h, h, r) = hm.transpose() * g_u;
  MapVMut(grad.data() + r * h + h + h * r, r) = g_u.colwise().sum();
  return grad;
}

BnnEvaluator::BnnEvaluator(BnnConfig cfg, HmcConfig hmc) : cfg_(cfg), hmc_(hmc) {}

BnnEvaluator::BnnEvaluator(BnnConfig cfg, std::vector<Eigen::VectorXd> draws,
                           nlohmann::ordered_json diagnostics)
    : cfg_(cfg), draws_(std::move(draws)), diagnostics_(std::move(diagnostics)) {
  if (cfg_.k < 2) throw InputError("bnn model has k < 2");
  cfg_.hidden_units = resolve_hidden(cfg_.k, cfg_.hidden_units);
  const int dim = bnn_param_count(cfg_.k, cfg_.hidden_units);
  for (const auto& psi : draws_)
    if (psi.size() != dim)
      throw InputError("bnn model draw has " + std::to_string(psi.size()) +
                       " weights, architecture needs " + std::to_string(dim));
}

void BnnEvaluator::fit(const PairedDataset& pairs, RngStream& rng) {
  pairs.validate();
  if (pairs.rows.empty()) throw InputError("bnn fit needs at least 1 pair");
  if (cfg_.k > 0 && static_cast<std::size_t>(cfg_.k) != pairs.k)
    throw InputError("bnn configured for k=" + std::to_string(cfg_.k) +
                     " but dataset has k=" + std::to_string(pairs.k));
  cfg_.k = static_cast<int>(pairs.k);
  cfg_.hidden_units = resolve_hidden(cfg_.k, cfg_.hidden_units);

  const BnnNetwork net(cfg_.k, cfg_.hidden_units);
  const Eigen::MatrixXd z = net.reduce_labels(pairs.labels());
  Eigen::MatrixXd yhat(pairs.rows.size(), cfg_.k);
  for (std::size_t i = 0; i < pairs.rows.size(); ++i)
    yhat.row(static_cast<Eigen::Index>(i)) = pairs.rows[i].yhat.as_eigen().transpose();

  const double sigma2 = cfg_.sigma2;
  const double box = cfg_.box_bound;
  const LogTargetFn logp = [&net, sigma2, &z, &yhat, box](const Eigen::VectorXd& psi) {
    return bnn_log_target(net, sigma2, z, yhat, psi, box);
  };
  const GradFn grad = [&net, sigma2, &z, &yhat](const Eigen::VectorXd& psi) {
    return bnn_grad_log_target(net, sigma2, z, yhat, psi);
  };
  const ChainInitFn init = [&net](int, RngStream& r) {
    Eigen::VectorXd psi(net.param_count());
    for (Eigen::Index j = 0; j < psi.size(); ++j) psi[j] = r.uniform() - 0.5;
    return psi;
  };

  HmcRunResult run = run_chains(logp, grad, hmc_, init, rng);
  // One lag interval of burn-in inside the bank, then lag-thinned draws.
  draws_ = draw_samples(run, run.selected_lag, run.selected_lag, hmc_.target_draws);

  diagnostics_ = nlohmann::ordered_json::object();
  diagnostics_["selected_lag"] = run.selected_lag;
  diagnostics_["post_adapt_iterations"] = run.post_adapt_iterations;
  diagnostics_["n_chains"] = run.chains.size();
  auto acc = nlohmann::ordered_json::array();
  auto steps = nlohmann::ordered_json::array();
  for (const auto& chain : run.chains) {
    acc.push_back(chain.attempted ? static_cast<double>(chain.accepted) /
                                        static_cast<double>(chain.attempted)
                                  : 0.0);
    steps.push_back(chain.step_size);
  }
  diagnostics_["acceptance"] = acc;
  diagnostics_["step_sizes"] = steps;
  diagnostics_["slope_threshold_effective"] = run.final_report.slope_threshold_effective;
  diagnostics_["slopes"] = run.final_report.slopes;
  diagnostics_["mean_spread"] = run.final_report.mean_spread;
  diagnostics_["pooled_std"] = run.final_report.pooled_std;
}

EvaluatorSamples BnnEvaluator::sample(const std::vector<ProbVec>& labels, std::size_t b,
                                      RngStream&) const {
  if (!fitted()) throw InvariantError("bnn evaluator sampled before fit");
  if (b > draws_.size())
    throw InputError("requested " + std::to_string(b) + " draws per label but the model holds " +
                     std::to_string(draws_.size()) + "; refit with target_draws >= " +
                     std::to_string(b));
  const BnnNetwork net(cfg_.k, cfg_.hidden_units);
  const Eigen::MatrixXd z = net.reduce_labels(labels);

  EvaluatorSamples out;
  out.n = labels.size();
  out.b = b;
  out.k = static_cast<std::size_t>(cfg_.k);
  out.data.resize(out.n * out.b * out.k);
  parallel_for(b, [&](std::size_t t) {
    const Eigen::MatrixXd m = net.forward_batch(draws_[t], z);
    for (std::size_t i = 0; i < out.n; ++i) {
      double* dst = out.slice(i, t);
      for (std::size_t c = 0; c < out.k; ++c)
        dst[c] = m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c));
    }
  });
  return out;
}

nlohmann::ordered_json BnnEvaluator::describe() const {
  return {{"kind", "bnn"},
          {"k", cfg_.k},
          {"hidden_units", cfg_.hidden_units},
          {"sigma2", cfg_.sigma2},
          {"box_bound", cfg_.box_bound},
          {"n_draws", draws_.size()},
          {"param_count", draws_.empty() ? bnn_param_count(cfg_.k, cfg_.hidden_units)
                                         : static_cast<int>(draws_[0].size())},
          {"hmc", diagnostics_}};
}

}  // namespace simplex_eval
