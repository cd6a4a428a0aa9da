#include "simplex_eval/paired_data.hpp"

#include <unordered_set>

#include "simplex_eval/errors.hpp"

namespace simplex_eval {

std::vector<ProbVec> PairedDataset::labels() const {
  std::vector<ProbVec> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.y);
  return out;
}

std::vector<ProbVec> PairedDataset::predictions() const {
  std::vector<ProbVec> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.yhat);
  return out;
}

std::vector<std::string> PairedDataset::ids() const {
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r.sample_id);
  return out;
}

PairedDataset PairedDataset::filter_split(const std::string& split) const {
  PairedDataset out;
  out.k = k;
  for (const auto& r : rows)
    if (r.split == split) out.rows.push_back(r);
  return out;
}

void PairedDataset::validate() const {
  if (k < 2) throw InputError("paired dataset needs at least 2 classes, got k=" + std::to_string(k));
  std::unordered_set<std::string> seen;
  seen.reserve(rows.size());
  for (const auto& r : rows) {
    if (r.y.size() != k || r.yhat.size() != k)
      throw InputError("sample '" + r.sample_id + "' has dimension " +
                       std::to_string(r.y.size() != k ? r.y.size() : r.yhat.size()) +
                       ", dataset has k=" + std::to_string(k));
    if (r.split != "train" && r.split != "test")
      throw InputError("sample '" + r.sample_id + "' has unknown split '" + r.split + "'");
    if (!seen.insert(r.sample_id).second)
      throw InputError("duplicate sample id '" + r.sample_id + "'");
  }
}

}  // namespace simplex_eval
