#ifndef SIMPLEX_EVAL_PAIRED_DATA_HPP
#define SIMPLEX_EVAL_PAIRED_DATA_HPP

#include <cstddef>
#include <string>
#include <vector>

#include "simplex_eval/simplex_geometry.hpp"

namespace simplex_eval {

// One labelled sample: accepted label y and predictor output yhat, both on
// the K-simplex, plus the split the sample belongs to.
struct PairRow {
  std::string sample_id;
  std::string split;  // "train" or "test"
  ProbVec y;
  ProbVec yhat;
};

struct PairedDataset {
  std::size_t k = 0;
  std::vector<PairRow> rows;

  std::vector<ProbVec> labels() const;
  std::vector<ProbVec> predictions() const;
  std::vector<std::string> ids() const;
  PairedDataset filter_split(const std::string& split) const;

  // Unique ids, consistent dimensions, valid split tags.  InputError.
  void validate() const;
};

}  // namespace simplex_eval

#endif
