#ifndef SIMPLEX_EVAL_EVALUATOR_SAMPLES_HPP
#define SIMPLEX_EVAL_EVALUATOR_SAMPLES_HPP

#include <cstddef>
#include <string>
#include <vector>

namespace simplex_eval {

// Dense N x B x K tensor of evaluator draws: for each of N labels, B draws
// from P(yhat | y), each a point on the K-simplex.  Sample-major layout:
// entry (i, b, c) sits at data[(i * B + b) * K + c].
struct EvaluatorSamples {
  std::size_t n = 0;
  std::size_t b = 0;
  std::size_t k = 0;
  std::vector<double> data;
  std::vector<std::string> sample_ids;  // optional, size n when present
  std::string split_tag;                // train / test / combined

  const double* slice(std::size_t i, std::size_t draw) const {
    return data.data() + (i * b + draw) * k;
  }
  double* slice(std::size_t i, std::size_t draw) {
    return data.data() + (i * b + draw) * k;
  }

  // Checks the shape and that every slice is on the simplex within tol.
  // Throws InvariantError.
  void validate(double tol = 1e-6) const;
};

}  // namespace simplex_eval

#endif
