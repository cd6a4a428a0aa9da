#ifndef SIMPLEX_EVAL_EXPERIMENTS_HPP
#define SIMPLEX_EVAL_EXPERIMENTS_HPP

#include <nlohmann/json.hpp>

#include "simplex_eval/paired_data.hpp"
#include "simplex_eval/run_config.hpp"

namespace simplex_eval {

// Half-split ranking experiment: shuffle and split the pairs by the config
// seed, fit each configured evaluator on the fit half, sample both halves,
// measure the normalized Euclidean distance from every draw to the actual
// predictor output, and rank the evaluators by eval-half RTCI upper bound
// (ascending; tighter is better).  Convergence and resampling failures mark
// the evaluator failed in the report and the run continues.  The report
// depends only on the inputs and the seed, never on wall time or thread
// count.
nlohmann::ordered_json run_exp1(const PairedDataset& pairs, const RunConfig& cfg);

}  // namespace simplex_eval

#endif
