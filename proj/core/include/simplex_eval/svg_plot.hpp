#ifndef SIMPLEX_EVAL_SVG_PLOT_HPP
#define SIMPLEX_EVAL_SVG_PLOT_HPP

#include <string>

#include "simplex_eval/credible_intervals.hpp"
#include "simplex_eval/data_io.hpp"

namespace simplex_eval {

// Standalone SVG histogram: bars, axes, the HPDI band shaded, the RTCI
// upper bound drawn as a dashed line (annotated as unbounded when it is
// infinite).  Output depends only on the arguments.
void write_histogram_svg(const std::string& path, const std::string& title,
                         const Histogram& hist, const CredibleInterval& hpdi_interval,
                         const CredibleInterval& rtci_interval);

}  // namespace simplex_eval

#endif
