#ifndef SIMPLEX_EVAL_MEASURES_HPP
#define SIMPLEX_EVAL_MEASURES_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "simplex_eval/evaluator_samples.hpp"
#include "simplex_eval/simplex_geometry.hpp"

namespace simplex_eval {

// Distance of two simplex points scaled into [0, 1]: ||a - b||_2 / sqrt(2).
// The scale is the distance between two simplex vertices.
double normalized_euclidean(const std::vector<double>& a, const std::vector<double>& b);

// KL divergence sum_k p_k log2(p_k / q_k) in bits.  Both arguments are
// smoothed first: add eps to every component, renormalize.  With eps = 0 the
// raw divergence is computed and may be +inf when q has a zero where p does
// not; callers track infinities via MeasureDistribution::infinite_count.
double kl_divergence(const std::vector<double>& p, const std::vector<double>& q,
                     double eps = 1e-10);

// Macro one-vs-rest ROC AUC.  The true class of a sample is the argmax of
// its label (first index on ties); class c is scored by the score vector's
// component c, ties handled by midranks.  Classes that never appear as a
// true class are skipped; fewer than two distinct true classes is an error.
double auc_macro(const std::vector<ProbVec>& labels, const std::vector<ProbVec>& scores);

enum class MeasureKind { normalized_euclidean, kl_divergence };

const char* measure_name(MeasureKind kind);

// Flat N*B (or B for AUC) collection of per-draw measure values.
struct MeasureDistribution {
  std::string measure_name;
  std::size_t n = 0;
  std::size_t b = 0;
  std::vector<double> values;  // sample-major: values[i * b + draw]
  std::size_t infinite_count = 0;
};

// values[i * B + draw] = measure(labels[i], samples(i, draw)).
MeasureDistribution measure_distribution(MeasureKind kind,
                                         const std::vector<ProbVec>& labels,
                                         const EvaluatorSamples& samples,
                                         double kl_eps = 1e-10);

// One macro AUC per draw column: values[draw] = auc over the N samples.
MeasureDistribution auc_distribution(const std::vector<ProbVec>& labels,
                                     const EvaluatorSamples& samples);

}  // namespace simplex_eval

#endif
