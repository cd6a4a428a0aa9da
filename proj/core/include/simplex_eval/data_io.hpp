#ifndef SIMPLEX_EVAL_DATA_IO_HPP
#define SIMPLEX_EVAL_DATA_IO_HPP

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "simplex_eval/credible_intervals.hpp"
#include "simplex_eval/evaluator_samples.hpp"
#include "simplex_eval/paired_data.hpp"
#include "simplex_eval/simplex_geometry.hpp"

namespace simplex_eval {

// Raw annotation rows surviving ingestion.  load_annotations drops rows
// whose class field is blank or not an integer (invalid annotator
// responses), errors with the line number on integer responses outside
// [0, k), and errors on duplicate (sample_id, annotator_id) pairs.
struct AnnotationRecord {
  std::string sample_id;
  std::string annotator_id;
  int class_index = 0;
};

struct AnnotationSet {
  std::size_t k = 0;
  std::vector<AnnotationRecord> records;
};

AnnotationSet load_annotations(const std::string& path, std::size_t k);

// Per sample, in first-appearance order: component c = (votes for class c) /
// (total votes for the sample).
std::vector<std::pair<std::string, ProbVec>> aggregate_human_frequency(
    const AnnotationSet& annotations);

// pairs.csv: header sample_id,split,y_0..y_{K-1},yhat_0..yhat_{K-1}; floats
// written with %.17g so a save/load round trip is exact.
PairedDataset load_pairs(const std::string& path);
void save_pairs(const std::string& path, const PairedDataset& pairs);

// labels.csv: header sample_id,y_0..y_{K-1} (what cmd_aggregate writes).
void save_labels(const std::string& path,
                 const std::vector<std::pair<std::string, ProbVec>>& labels);

// Either label file the sampling and measuring commands accept: a plain
// labels.csv (splits and yhat left empty) or a full pairs.csv.
struct LabelTable {
  std::size_t k = 0;
  std::vector<std::string> ids;
  std::vector<std::string> splits;  // empty for labels.csv input
  std::vector<ProbVec> y;
  std::vector<ProbVec> yhat;        // empty for labels.csv input
};

LabelTable load_label_table(const std::string& path);

// Tensor container: magic SEVT0001, then uint64 N, B, K, then N*B*K
// little-endian float64 in sample-major, draw-second, class-minor order.
// The loader rejects NaN and infinities.
void save_tensor(const std::string& path, const EvaluatorSamples& samples);
EvaluatorSamples load_tensor(const std::string& path);

// Deterministic Fisher-Yates shuffle by seed, then first ceil(n/2) rows out
// of the shuffle form the fit half.  Needs >= 2 rows.
std::pair<PairedDataset, PairedDataset> split_half_shuffled(const PairedDataset& pairs,
                                                            std::uint64_t seed);

struct Histogram {
  std::vector<double> edges;          // bins + 1 when nonempty
  std::vector<std::uint64_t> counts;  // finite values only
};

Histogram histogram(const std::vector<double>& values, std::size_t bins = 50);

// One report record: the summary block emitted per measure per split.
struct MeasureRecord {
  std::string measure_name;
  std::size_t count = 0;  // all values, infinities included
  double mean = 0.0;      // finite values only
  double median = 0.0;
  CredibleInterval hpdi;
  CredibleInterval rtci;
  Histogram hist;
};

MeasureRecord summarize_measure(const std::string& name, const std::vector<double>& values,
                                double mass, std::size_t bins = 50);

// Non-finite doubles serialize as the strings "inf", "-inf", "nan"; JSON has
// no literals for them.
nlohmann::ordered_json json_double(double v);
nlohmann::ordered_json measure_record_json(const MeasureRecord& record);

void save_report(const std::string& path, const nlohmann::ordered_json& report);

}  // namespace simplex_eval

#endif
