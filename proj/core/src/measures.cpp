#include "simplex_eval/measures.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "simplex_eval/errors.hpp"
#include "simplex_eval/parallel.hpp"

namespace simplex_eval {

void EvaluatorSamples::validate(double tol) const {
  if (data.size() != n * b * k)
    throw InvariantError("EvaluatorSamples: buffer holds " + std::to_string(data.size()) +
                         " values, shape wants " + std::to_string(n * b * k));
  if (!sample_ids.empty() && sample_ids.size() != n)
    throw InvariantError("EvaluatorSamples: sample_ids length does not match n");
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t d = 0; d < b; ++d) {
      const double* s = slice(i, d);
      double sum = 0.0;
      for (std::size_t c = 0; c < k; ++c) {
        if (!std::isfinite(s[c]) || s[c] < -tol)
          throw InvariantError("EvaluatorSamples: slice (" + std::to_string(i) + ", " +
                               std::to_string(d) + ") leaves the simplex");
        sum += s[c];
      }
      if (std::abs(sum - 1.0) > tol)
        throw InvariantError("EvaluatorSamples: slice (" + std::to_string(i) + ", " +
                             std::to_string(d) + ") sums to " + std::to_string(sum));
    }
  }
}

namespace {

double norm_euclid_raw(const double* a, const double* b, std::size_t k) {
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return std::sqrt(acc) * M_SQRT1_2;
}

double kl_raw(const double* p, const double* q, std::size_t k, double eps) {
  constexpr double kLog2 = 0.6931471805599453;
  if (eps > 0.0) {
    const double pz = 1.0 + static_cast<double>(k) * eps;
    double acc = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
      const double pi = (p[i] + eps) / pz;
      const double qi = (q[i] + eps) / pz;
      acc += pi * std::log(pi / qi);
    }
    return std::max(acc, 0.0) / kLog2;
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (p[i] <= 0.0) continue;  // 0 * log(0/q) = 0
    if (q[i] <= 0.0) return std::numeric_limits<double>::infinity();
    acc += p[i] * std::log(p[i] / q[i]);
  }
  return std::max(acc, 0.0) / kLog2;
}

int argmax_class(const ProbVec& label) {
  int best = 0;
  for (std::size_t c = 1; c < label.size(); ++c)
    if (label[c] > label[best]) best = static_cast<int>(c);
  return best;
}

// Mann-Whitney AUC with midranks for one class; scores(i) is the class
// probability of sample i, positive(i) says whether sample i belongs to it.
template <typename ScoreAt>
double auc_one_class(std::size_t n, const std::vector<char>& positive, ScoreAt scores) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores(a) < scores(b); });

  double rank_sum_pos = 0.0;
  std::size_t n_pos = 0;
  std::size_t i = 0;
  while (i < n) {
    std::size_t j = i;
    while (j + 1 < n && scores(order[j + 1]) == scores(order[i])) ++j;
    const double midrank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t t = i; t <= j; ++t) {
      if (positive[order[t]]) {
        rank_sum_pos += midrank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  const double u = rank_sum_pos - 0.5 * static_cast<double>(n_pos) *
                                      static_cast<double>(n_pos + 1);
  return u / (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

template <typename ScoreAt>
double auc_macro_impl(const std::vector<int>& true_class, std::size_t k, ScoreAt score_at) {
  const std::size_t n = true_class.size();
  std::vector<std::size_t> class_count(k, 0);
  for (int c : true_class) ++class_count[static_cast<std::size_t>(c)];
  std::size_t distinct = 0;
  for (std::size_t c = 0; c < k; ++c)
    if (class_count[c] > 0) ++distinct;
  if (distinct < 2)
    throw InputError("auc_macro: labels contain a single distinct class, "
                     "one-vs-rest AUC is undefined");

  double acc = 0.0;
  std::size_t used = 0;
  std::vector<char> positive(n);
  for (std::size_t c = 0; c < k; ++c) {
    if (class_count[c] == 0) continue;
    for (std::size_t i = 0; i < n; ++i)
      positive[i] = (true_class[i] == static_cast<int>(c)) ? 1 : 0;
    acc += auc_one_class(n, positive, [&](std::size_t i) { return score_at(i, c); });
    ++used;
  }
  return acc / static_cast<double>(used);
}

}  // namespace

double normalized_euclidean(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() != b.size() || a.empty())
    throw InputError("normalized_euclidean: dimension mismatch");
  return norm_euclid_raw(a.data(), b.data(), a.size());
}

double kl_divergence(const std::vector<double>& p, const std::vector<double>& q, double eps) {
  if (p.size() != q.size() || p.empty())
    throw InputError("kl_divergence: dimension mismatch");
  if (eps < 0.0) throw InputError("kl_divergence: eps must be nonnegative");
  return kl_raw(p.data(), q.data(), p.size(), eps);
}

double auc_macro(const std::vector<ProbVec>& labels, const std::vector<ProbVec>& scores) {
  if (labels.size() != scores.size() || labels.empty())
    throw InputError("auc_macro: need matching, nonempty label and score lists");
  const std::size_t k = labels[0].size();
  std::vector<int> true_class(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != k || scores[i].size() != k)
      throw InputError("auc_macro: inconsistent dimensions at sample " + std::to_string(i));
    true_class[i] = argmax_class(labels[i]);
  }
  return auc_macro_impl(true_class, k,
                        [&](std::size_t i, std::size_t c) { return scores[i][c]; });
}

const char* measure_name(MeasureKind kind) {
  switch (kind) {
    case MeasureKind::normalized_euclidean: return "normalized_euclidean";
    case MeasureKind::kl_divergence: return "kl_divergence";
  }
  return "unknown";
}

MeasureDistribution measure_distribution(MeasureKind kind,
                                         const std::vector<ProbVec>& labels,
                                         const EvaluatorSamples& samples,
                                         double kl_eps) {
  if (labels.size() != samples.n)
    throw InputError("measure_distribution: " + std::to_string(labels.size()) +
                     " labels for a tensor with n = " + std::to_string(samples.n));
  MeasureDistribution dist;
  dist.measure_name = measure_name(kind);
  dist.n = samples.n;
  dist.b = samples.b;
  dist.values.assign(samples.n * samples.b, 0.0);

  parallel_for(samples.n, [&](std::size_t i) {
    if (labels[i].size() != samples.k)
      throw InputError("measure_distribution: label " + std::to_string(i) +
                       " has wrong dimension");
    const double* label = labels[i].data().data();
    for (std::size_t d = 0; d < samples.b; ++d) {
      const double* s = samples.slice(i, d);
      dist.values[i * samples.b + d] =
          (kind == MeasureKind::normalized_euclidean)
              ? norm_euclid_raw(label, s, samples.k)
              : kl_raw(label, s, samples.k, kl_eps);
    }
  });

  dist.infinite_count = static_cast<std::size_t>(
      std::count_if(dist.values.begin(), dist.values.end(),
                    [](double v) { return std::isinf(v); }));
  return dist;
}

MeasureDistribution auc_distribution(const std::vector<ProbVec>& labels,
                                     const EvaluatorSamples& samples) {
  if (labels.size() != samples.n)
    throw InputError("auc_distribution: label count does not match tensor n");
  std::vector<int> true_class(labels.size());
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i].size() != samples.k)
      throw InputError("auc_distribution: label " + std::to_string(i) +
                       " has wrong dimension");
    true_class[i] = argmax_class(labels[i]);
  }

  MeasureDistribution dist;
  dist.measure_name = "auc";
  dist.n = 1;
  dist.b = samples.b;
  dist.values.assign(samples.b, 0.0);
  parallel_for(samples.b, [&](std::size_t d) {
    dist.values[d] = auc_macro_impl(true_class, samples.k, [&](std::size_t i, std::size_t c) {
      return samples.slice(i, d)[c];
    });
  });
  return dist;
}

}  // namespace simplex_eval
