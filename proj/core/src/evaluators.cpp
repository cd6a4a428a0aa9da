#include "simplex_eval/evaluators.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <iostream>
#include <utility>

#include "simplex_eval/bnn_evaluator.hpp"
#include "simplex_eval/errors.hpp"
#include "simplex_eval/parallel.hpp"
#include "wire.hpp"

namespace simplex_eval {

const char* evaluator_kind_name(EvaluatorKind kind) {
  switch (kind) {
    case EvaluatorKind::uniform_dirichlet: return "uniform";
    case EvaluatorKind::mle_dirichlet: return "mle-dirichlet";
    case EvaluatorKind::ndod: return "ndod";
    case EvaluatorKind::ndod_zero_mean: return "ndod-zero";
    case EvaluatorKind::bnn: return "bnn";
  }
  throw InvariantError("unhandled evaluator kind");
}

EvaluatorKind evaluator_kind_from_name(const std::string& name) {
  if (name == "uniform") return EvaluatorKind::uniform_dirichlet;
  if (name == "mle-dirichlet") return EvaluatorKind::mle_dirichlet;
  if (name == "ndod") return EvaluatorKind::ndod;
  if (name == "ndod-zero") return EvaluatorKind::ndod_zero_mean;
  if (name == "bnn") return EvaluatorKind::bnn;
  throw InputError("unknown evaluator '" + name +
                   "' (expected uniform, mle-dirichlet, ndod, ndod-zero, or bnn)");
}

namespace {

constexpr std::uint64_t kSampleTag = 0x53414d50;  // per-label stream key

EvaluatorSamples make_tensor(std::size_t n, std::size_t b, std::size_t k) {
  EvaluatorSamples out;
  out.n = n;
  out.b = b;
  out.k = k;
  out.data.resize(n * b * k);
  return out;
}

void check_labels(const std::vector<ProbVec>& labels, std::size_t k) {
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i].size() != k)
      throw InputError("label " + std::to_string(i) + " has dimension " +
                       std::to_string(labels[i].size()) + ", evaluator has k=" +
                       std::to_string(k));
}

// Rounding in from_reduced can leave components at -1e-17; snap those to 0
// and renormalize so stored draws satisfy the tensor invariant exactly.
void write_clamped(double* dst, const Eigen::VectorXd& p) {
  double sum = 0.0;
  for (Eigen::Index c = 0; c < p.size(); ++c) {
    const double v = p[c] < 0.0 ? 0.0 : p[c];
    dst[c] = v;
    sum += v;
  }
  for (Eigen::Index c = 0; c < p.size(); ++c) dst[c] /= sum;
}

}  // namespace

void UniformDirichletEvaluator::fit(const PairedDataset& pairs, RngStream&) {
  pairs.validate();
  k_ = pairs.k;
}

EvaluatorSamples UniformDirichletEvaluator::sample(const std::vector<ProbVec>& labels,
                                                   std::size_t b, RngStream& rng) const {
  if (!fitted()) throw InvariantError("uniform evaluator sampled before fit");
  check_labels(labels, k_);
  EvaluatorSamples out = make_tensor(labels.size(), b, k_);
  const std::vector<double> alpha(k_, 1.0);
  const RngStream base(rng.next_u64());
  parallel_for(labels.size(), [&](std::size_t i) {
    RngStream s = base.derive(kSampleTag, i);
    for (std::size_t d = 0; d < b; ++d) {
      const std::vector<double> p = dirichlet_sample(alpha, s);
      std::copy(p.begin(), p.end(), out.slice(i, d));
    }
  });
  return out;
}

nlohmann::ordered_json UniformDirichletEvaluator::describe() const {
  return {{"kind", "uniform"}, {"k", k_}};
}

MleDirichletEvaluator::MleDirichletEvaluator(std::vector<double> mean, double precision,
                                             bool capped)
    : mean_(std::move(mean)), precision_(precision), capped_(capped) {}

void MleDirichletEvaluator::fit(const PairedDataset& pairs, RngStream&) {
  pairs.validate();
  std::vector<std::vector<double>> preds;
  preds.reserve(pairs.rows.size());
  for (const auto& r : pairs.rows) preds.push_back(r.yhat.data());
  const DirichletFitResult res = fit_dirichlet_mean_precision(preds, opts_);
  mean_ = res.mean;
  precision_ = res.precision;
  capped_ = res.precision_capped;
  if (capped_)
    std::cerr << "warning: dirichlet precision capped at " << opts_.precision_max
              << "; prediction spread is degenerate\n";
}

EvaluatorSamples MleDirichletEvaluator::sample(const std::vector<ProbVec>& labels,
                                               std::size_t b, RngStream& rng) const {
  if (!fitted()) throw InvariantError("mle-dirichlet evaluator sampled before fit");
  check_labels(labels, mean_.size());
  EvaluatorSamples out = make_tensor(labels.size(), b, mean_.size());
  std::vector<double> alpha(mean_.size());
  for (std::size_t c = 0; c < mean_.size(); ++c) alpha[c] = precision_ * mean_[c];
  const RngStream base(rng.next_u64());
  parallel_for(labels.size(), [&](std::size_t i) {
    RngStream s = base.derive(kSampleTag, i);
    for (std::size_t d = 0; d < b; ++d) {
      const std::vector<double> p = dirichlet_sample(alpha, s);
      std::copy(p.begin(), p.end(), out.slice(i, d));
    }
  });
  return out;
}

nlohmann::ordered_json MleDirichletEvaluator::describe() const {
  return {{"kind", "mle-dirichlet"},
          {"k", mean_.size()},
          {"mean", mean_},
          {"precision", precision_},
          {"precision_capped", capped_}};
}

NdodEvaluator::NdodEvaluator(std::size_t k, Eigen::VectorXd mu, Eigen::MatrixXd cov,
                             bool zero_mean, std::size_t max_attempts)
    : zero_mean_(zero_mean),
      max_attempts_(max_attempts),
      k_(k),
      rot_(build_rotation(static_cast<int>(k))),
      mu_(std::move(mu)),
      cov_(std::move(cov)) {
  if (mu_.size() != static_cast<Eigen::Index>(k_ - 1) || cov_.rows() != mu_.size() ||
      cov_.cols() != mu_.size())
    throw InputError("ndod parameter dimensions do not match k=" + std::to_string(k_));
}

void NdodEvaluator::fit(const PairedDataset& pairs, RngStream&) {
  pairs.validate();
  const std::size_t n = pairs.rows.size();
  if (n < 2) throw InputError("ndod fit needs at least 2 pairs, got " + std::to_string(n));
  k_ = pairs.k;
  rot_ = build_rotation(static_cast<int>(k_));
  std::vector<Eigen::VectorXd> diffs;
  diffs.reserve(n);
  for (const auto& r : pairs.rows)
    diffs.push_back(to_reduced(rot_, r.yhat) - to_reduced(rot_, r.y));
  const Eigen::Index d = static_cast<Eigen::Index>(k_) - 1;
  if (zero_mean_) {
    mu_ = Eigen::VectorXd::Zero(d);
    cov_ = Eigen::MatrixXd::Zero(d, d);
    for (const auto& v : diffs) cov_ += v * v.transpose();
    cov_ /= static_cast<double>(n - 1);
  } else {
    MeanCov mc = estimate_mean_cov(diffs);
    mu_ = std::move(mc.mean);
    cov_ = std::move(mc.cov);
  }
}

EvaluatorSamples NdodEvaluator::sample(const std::vector<ProbVec>& labels, std::size_t b,
                                       RngStream& rng) const {
  if (!fitted())
    throw InvariantError(std::string(evaluator_kind_name(kind())) +
                         " evaluator sampled before fit");
  check_labels(labels, k_);
  EvaluatorSamples out = make_tensor(labels.size(), b, k_);
  const RngStream base(rng.next_u64());
  parallel_for(labels.size(), [&](std::size_t i) {
    RngStream s = base.derive(kSampleTag, i);
    const Eigen::VectorXd zy = to_reduced(rot_, labels[i]);
    Eigen::VectorXd p(static_cast<Eigen::Index>(k_));
    for (std::size_t d = 0; d < b; ++d) {
      bool accepted = false;
      for (std::size_t attempt = 0; attempt < max_attempts_; ++attempt) {
        p = from_reduced(rot_, zy + mvn_sample(mu_, cov_, s));
        if (is_in_simplex(p, 1e-9)) {
          write_clamped(out.slice(i, d), p);
          accepted = true;
          break;
        }
      }
      if (!accepted)
        throw ResamplingError("rejection sampling exhausted " + std::to_string(max_attempts_) +
                              " attempts for label " + std::to_string(i));
    }
  });
  return out;
}

nlohmann::ordered_json NdodEvaluator::describe() const {
  std::vector<double> mu(mu_.data(), mu_.data() + mu_.size());
  std::vector<std::vector<double>> cov;
  for (Eigen::Index r = 0; r < cov_.rows(); ++r)
    cov.emplace_back(cov_.row(r).begin(), cov_.row(r).end());
  return {{"kind", evaluator_kind_name(kind())},
          {"k", k_},
          {"mu", mu},
          {"cov", cov},
          {"max_attempts", max_attempts_}};
}

namespace {
constexpr char kModelMagic[8] = {'S', 'E', 'V', 'M', '0', '0', '0', '1'};
}

void save_model(const std::string& path, const Evaluator& evaluator) {
  if (!evaluator.fitted()) throw InvariantError("cannot save an unfitted evaluator");
  nlohmann::ordered_json header;
  header["kind"] = evaluator_kind_name(evaluator.kind());
  header["k"] = evaluator.k();
  std::vector<double> payload;
  switch (evaluator.kind()) {
    case EvaluatorKind::uniform_dirichlet:
      break;
    case EvaluatorKind::mle_dirichlet: {
      const auto& e = static_cast<const MleDirichletEvaluator&>(evaluator);
      header["precision_capped"] = e.precision_capped();
      header["payload_layout"] = "mean[k], precision";
      payload = e.mean();
      payload.push_back(e.precision());
      break;
    }
    case EvaluatorKind::ndod:
    case EvaluatorKind::ndod_zero_mean: {
      const auto& e = static_cast<const NdodEvaluator&>(evaluator);
      header["max_attempts"] = e.max_attempts();
      header["payload_layout"] = "mu[k-1], cov[k-1][k-1] row-major";
      payload.assign(e.mu().data(), e.mu().data() + e.mu().size());
      for (Eigen::Index r = 0; r < e.cov().rows(); ++r)
        for (Eigen::Index c = 0; c < e.cov().cols(); ++c) payload.push_back(e.cov()(r, c));
      break;
    }
    case EvaluatorKind::bnn: {
      const auto& e = static_cast<const BnnEvaluator&>(evaluator);
      header["hidden_units"] = e.config().hidden_units;
      header["sigma2"] = e.config().sigma2;
      header["box_bound"] = e.config().box_bound;
      header["n_draws"] = e.draws().size();
      header["param_count"] = e.draws().empty() ? 0 : e.draws()[0].size();
      header["hmc"] = e.diagnostics();
      header["payload_layout"] = "n_draws x param_count weight vectors";
      for (const auto& psi : e.draws())
        payload.insert(payload.end(), psi.data(), psi.data() + psi.size());
      break;
    }
  }
  header["payload_count"] = payload.size();

  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os.write(kModelMagic, 8);
  const std::string hdr = header.dump();
  wire::write_u64(os, hdr.size());
  os.write(hdr.data(), static_cast<std::streamsize>(hdr.size()));
  wire::write_f64(os, payload.data(), payload.size());
  os.flush();
  if (!os) throw InputError("write to '" + path + "' failed");
}

std::unique_ptr<Evaluator> load_model(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open model file '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, kModelMagic, 8) != 0)
    throw InputError("'" + path + "' is not a model file (bad magic)");
  const std::uint64_t hlen = wire::read_u64(is);
  if (!is || hlen > (1ull << 30))
    throw InputError("'" + path + "' has a corrupt header length");
  std::string hdr(hlen, '\0');
  is.read(hdr.data(), static_cast<std::streamsize>(hlen));
  if (!is) throw InputError("'" + path + "' header is truncated");

  nlohmann::ordered_json h;
  try {
    h = nlohmann::ordered_json::parse(hdr);
  } catch (const nlohmann::json::parse_error& e) {
    throw InputError("'" + path + "' header is not valid JSON: " + e.what());
  }

  std::unique_ptr<Evaluator> out;
  try {
    const EvaluatorKind kind = evaluator_kind_from_name(h.at("kind").get<std::string>());
    const std::size_t k = h.at("k").get<std::size_t>();
    const std::size_t count = h.at("payload_count").get<std::size_t>();
    std::vector<double> payload = wire::read_f64(is, count);
    if (!is) throw InputError("'" + path + "' payload is truncated");

    switch (kind) {
      case EvaluatorKind::uniform_dirichlet:
        out = std::make_unique<UniformDirichletEvaluator>(k);
        break;
      case EvaluatorKind::mle_dirichlet: {
        if (count != k + 1)
          throw InputError("'" + path + "' payload has " + std::to_string(count) +
                           " values, expected " + std::to_string(k + 1));
        std::vector<double> mean(payload.begin(), payload.begin() + static_cast<long>(k));
        out = std::make_unique<MleDirichletEvaluator>(std::move(mean), payload[k],
                                                      h.at("precision_capped").get<bool>());
        break;
      }
      case EvaluatorKind::ndod:
      case EvaluatorKind::ndod_zero_mean: {
        const std::size_t d = k - 1;
        if (count != d + d * d)
          throw InputError("'" + path + "' payload has " + std::to_string(count) +
                           " values, expected " + std::to_string(d + d * d));
        Eigen::VectorXd mu(static_cast<Eigen::Index>(d));
        for (std::size_t i = 0; i < d; ++i) mu[static_cast<Eigen::Index>(i)] = payload[i];
        Eigen::MatrixXd cov(d, d);
        for (std::size_t r = 0; r < d; ++r)
          for (std::size_t c = 0; c < d; ++c)
            cov(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                payload[d + r * d + c];
        out = std::make_unique<NdodEvaluator>(k, std::move(mu), std::move(cov),
                                              kind == EvaluatorKind::ndod_zero_mean,
                                              h.at("max_attempts").get<std::size_t>());
        break;
      }
      case EvaluatorKind::bnn: {
        BnnConfig cfg;
        cfg.k = static_cast<int>(k);
        cfg.hidden_units = h.at("hidden_units").get<int>();
        cfg.sigma2 = h.at("sigma2").get<double>();
        cfg.box_bound = h.at("box_bound").get<double>();
        const std::size_t n_draws = h.at("n_draws").get<std::size_t>();
        const std::size_t dim = h.at("param_count").get<std::size_t>();
        if (count != n_draws * dim)
          throw InputError("'" + path + "' payload has " + std::to_string(count) +
                           " values, expected " + std::to_string(n_draws * dim));
        std::vector<Eigen::VectorXd> draws(n_draws,
                                           Eigen::VectorXd(static_cast<Eigen::Index>(dim)));
        for (std::size_t t = 0; t < n_draws; ++t)
          for (std::size_t j = 0; j < dim; ++j)
            draws[t][static_cast<Eigen::Index>(j)] = payload[t * dim + j];
        out = std::make_unique<BnnEvaluator>(cfg, std::move(draws),
                                             h.value("hmc", nlohmann::ordered_json::object()));
        break;
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError("'" + path + "' header is missing fields: " + e.what());
  }
  return out;
}

}  // namespace simplex_eval
