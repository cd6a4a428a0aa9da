#ifndef SIMPLEX_EVAL_CREDIBLE_INTERVALS_HPP
#define SIMPLEX_EVAL_CREDIBLE_INTERVALS_HPP

#include <cstddef>
#include <vector>

namespace simplex_eval {

struct CredibleInterval {
  double lower = 0.0;
  double upper = 0.0;
  double mass = 0.0;
};

// Highest posterior density interval of an empirical sample: the window of
// w = ceil(mass * n) consecutive sorted values with minimal width, ties
// resolved toward the smallest lower bound.  +inf values sort to the right
// tail and give an infinite upper bound only when every window of w values
// is forced to include one.  mass in (0, 1]; values finite or +inf, no NaN.
CredibleInterval hpdi(const std::vector<double>& values, double mass);

// Right-tail credible interval: upper is the linear-interpolation (type 7)
// quantile at the given mass, lower is the sample minimum standing in for
// -inf.  +inf values participate in the quantile position, so the upper
// bound is +inf exactly when the quantile index lands in the infinite tail.
CredibleInterval rtci(const std::vector<double>& values, double mass);

struct SummaryStats {
  double mean = 0.0;     // over finite values only
  double median = 0.0;   // type 7 quantile at 0.5 over all values
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
  std::size_t excluded_count = 0;  // non-finite values excluded from mean
};

SummaryStats summary_stats(const std::vector<double>& values);

}  // namespace simplex_eval

#endif
