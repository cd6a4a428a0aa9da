#include "simplex_eval/credible_intervals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "simplex_eval/errors.hpp"

namespace simplex_eval {

namespace {

std::vector<double> sorted_checked(const std::vector<double>& values, const char* who) {
  if (values.empty()) throw InputError(std::string(who) + ": empty value list");
  for (double v : values)
    if (std::isnan(v)) throw InputError(std::string(who) + ": NaN value");
  std::vector<double> s(values);
  std::sort(s.begin(), s.end());
  return s;
}

void check_mass(double mass, const char* who) {
  if (!(mass > 0.0) || mass > 1.0)
    throw InputError(std::string(who) + ": mass must be in (0, 1], got " +
                     std::to_string(mass));
}

// Type 7 quantile on an already sorted sample.
double quantile_sorted(const std::vector<double>& s, double level) {
  const std::size_t n = s.size();
  const double h = level * static_cast<double>(n - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = static_cast<std::size_t>(std::ceil(h));
  if (lo == hi) return s[lo];
  const double frac = h - static_cast<double>(lo);
  if (std::isinf(s[hi])) return frac > 0.0 ? s[hi] : s[lo];
  if (std::isinf(s[lo])) return s[lo];
  return s[lo] + frac * (s[hi] - s[lo]);
}

}  // namespace

CredibleInterval hpdi(const std::vector<double>& values, double mass) {
  check_mass(mass, "hpdi");
  const std::vector<double> s = sorted_checked(values, "hpdi");
  const std::size_t n = s.size();
  std::size_t w = static_cast<std::size_t>(
      std::ceil(mass * static_cast<double>(n) - 1e-12));
  w = std::clamp<std::size_t>(w, 1, n);

  std::size_t best = 0;
  double best_width = std::numeric_limits<double>::infinity();
  bool found = false;
  for (std::size_t i = 0; i + w <= n; ++i) {
    const double hi = s[i + w - 1];
    const double lo = s[i];
    const double width = (std::isinf(hi) || std::isinf(lo))
                             ? std::numeric_limits<double>::infinity()
                             : hi - lo;
    if (!found || width < best_width) {
      found = true;
      best = i;
      best_width = width;
    }
  }
  return CredibleInterval{s[best], s[best + w - 1], mass};
}

CredibleInterval rtci(const std::vector<double>& values, double mass) {
  check_mass(mass, "rtci");
  const std::vector<double> s = sorted_checked(values, "rtci");
  return CredibleInterval{s.front(), quantile_sorted(s, mass), mass};
}

SummaryStats summary_stats(const std::vector<double>& values) {
  const std::vector<double> s = sorted_checked(values, "summary_stats");
  SummaryStats st;
  st.count = s.size();
  st.min = s.front();
  st.max = s.back();
  st.median = quantile_sorted(s, 0.5);
  double sum = 0.0;
  std::size_t finite = 0;
  for (double v : s) {
    if (std::isfinite(v)) {
      sum += v;
      ++finite;
    }
  }
  st.excluded_count = st.count - finite;
  st.mean = finite > 0 ? sum / static_cast<double>(finite)
                       : std::numeric_limits<double>::quiet_NaN();
  return st;
}

}  // namespace simplex_eval
