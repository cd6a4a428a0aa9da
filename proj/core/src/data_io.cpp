#include "simplex_eval/data_io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <unordered_map>
#include <unordered_set>

#include "simplex_eval/errors.hpp"
#include "simplex_eval/rng.hpp"
#include "wire.hpp"

namespace simplex_eval {

namespace {

std::string trimmed(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = line.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

// All lines of a text file with trailing \r stripped; index 0 is line 1.
std::vector<std::string> read_lines(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open '" + path + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(line);
  }
  return lines;
}

std::string at_line(const std::string& path, std::size_t lineno) {
  return "'" + path + "' line " + std::to_string(lineno) + ": ";
}

double parse_prob(const std::string& path, std::size_t lineno, const std::string& field) {
  const std::string t = trimmed(field);
  if (t.empty()) throw InputError(at_line(path, lineno) + "empty probability field");
  char* end = nullptr;
  const double v = std::strtod(t.c_str(), &end);
  if (end != t.c_str() + t.size())
    throw InputError(at_line(path, lineno) + "'" + t + "' is not a number");
  if (!std::isfinite(v))
    throw InputError(at_line(path, lineno) + "probability field is not finite");
  return v;
}

bool parse_int_strict(const std::string& field, long& out) {
  const std::string t = trimmed(field);
  if (t.empty()) return false;
  char* end = nullptr;
  out = std::strtol(t.c_str(), &end, 10);
  return end == t.c_str() + t.size();
}

ProbVec parse_prob_vec(const std::string& path, std::size_t lineno,
                       const std::vector<std::string>& fields, std::size_t offset,
                       std::size_t k) {
  std::vector<double> v(k);
  for (std::size_t c = 0; c < k; ++c) v[c] = parse_prob(path, lineno, fields[offset + c]);
  try {
    return ProbVec(std::move(v));
  } catch (const InputError& e) {
    throw InputError(at_line(path, lineno) + e.what());
  }
}

std::string prob_header(const std::string& prefix, std::size_t k) {
  std::string out;
  for (std::size_t c = 0; c < k; ++c) out += "," + prefix + "_" + std::to_string(c);
  return out;
}

void write_probs(std::string& out, const ProbVec& p) {
  char buf[40];
  for (std::size_t c = 0; c < p.size(); ++c) {
    std::snprintf(buf, sizeof buf, ",%.17g", p[c]);
    out += buf;
  }
}

}  // namespace

AnnotationSet load_annotations(const std::string& path, std::size_t k) {
  if (k < 2) throw InputError("annotation ingestion needs k >= 2, got " + std::to_string(k));
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty() || trimmed(lines[0]) != "sample_id,annotator_id,class_index")
    throw InputError("'" + path +
                     "' line 1: expected header sample_id,annotator_id,class_index");

  AnnotationSet out;
  out.k = k;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trimmed(lines[i]).empty()) continue;
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != 3)
      throw InputError(at_line(path, lineno) + "expected 3 fields, got " +
                       std::to_string(fields.size()));
    const std::string sample = trimmed(fields[0]);
    const std::string annotator = trimmed(fields[1]);
    if (sample.empty() || annotator.empty())
      throw InputError(at_line(path, lineno) + "empty sample or annotator id");
    long cls = 0;
    if (!parse_int_strict(fields[2], cls)) continue;  // invalid response, dropped
    if (cls < 0 || cls >= static_cast<long>(k))
      throw InputError(at_line(path, lineno) + "class index " + std::to_string(cls) +
                       " outside [0, " + std::to_string(k) + ")");
    if (!seen.insert(sample + '\x1f' + annotator).second)
      throw InputError(at_line(path, lineno) + "duplicate annotation for sample '" + sample +
                       "' by annotator '" + annotator + "'");
    out.records.push_back({sample, annotator, static_cast<int>(cls)});
  }
  if (out.records.empty()) throw InputError("'" + path + "' holds no valid annotations");
  return out;
}

std::vector<std::pair<std::string, ProbVec>> aggregate_human_frequency(
    const AnnotationSet& annotations) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<double>> counts;
  for (const auto& r : annotations.records) {
    auto [it, inserted] = counts.try_emplace(r.sample_id, annotations.k, 0.0);
    if (inserted) order.push_back(r.sample_id);
    it->second[static_cast<std::size_t>(r.class_index)] += 1.0;
  }
  std::vector<std::pair<std::string, ProbVec>> out;
  out.reserve(order.size());
  for (const auto& id : order) {
    std::vector<double>& c = counts[id];
    double total = 0.0;
    for (double v : c) total += v;
    for (double& v : c) v /= total;
    out.emplace_back(id, ProbVec(std::move(c)));
  }
  return out;
}

PairedDataset load_pairs(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw InputError("'" + path + "' is empty");
  const std::vector<std::string> head = split_fields(trimmed(lines[0]));
  if (head.size() < 6 || head.size() % 2 != 0 || head[0] != "sample_id" || head[1] != "split")
    throw InputError("'" + path + "' line 1: expected header sample_id,split,y_0..,yhat_0..");
  const std::size_t k = (head.size() - 2) / 2;
  for (std::size_t c = 0; c < k; ++c) {
    if (head[2 + c] != "y_" + std::to_string(c) ||
        head[2 + k + c] != "yhat_" + std::to_string(c))
      throw InputError("'" + path + "' line 1: expected header sample_id,split,y_0..,yhat_0..");
  }

  PairedDataset out;
  out.k = k;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trimmed(lines[i]).empty()) continue;
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != 2 + 2 * k)
      throw InputError(at_line(path, lineno) + "expected " + std::to_string(2 + 2 * k) +
                       " fields, got " + std::to_string(fields.size()));
    PairRow row;
    row.sample_id = trimmed(fields[0]);
    row.split = trimmed(fields[1]);
    if (row.sample_id.empty()) throw InputError(at_line(path, lineno) + "empty sample id");
    if (row.split != "train" && row.split != "test")
      throw InputError(at_line(path, lineno) + "split must be train or test, got '" +
                       row.split + "'");
    if (!seen.insert(row.sample_id).second)
      throw InputError(at_line(path, lineno) + "duplicate sample id '" + row.sample_id + "'");
    row.y = parse_prob_vec(path, lineno, fields, 2, k);
    row.yhat = parse_prob_vec(path, lineno, fields, 2 + k, k);
    out.rows.push_back(std::move(row));
  }
  return out;
}

void save_pairs(const std::string& path, const PairedDataset& pairs) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  std::string out = "sample_id,split" + prob_header("y", pairs.k) + prob_header("yhat", pairs.k) +
                    "\n";
  for (const auto& r : pairs.rows) {
    out += r.sample_id + "," + r.split;
    write_probs(out, r.y);
    write_probs(out, r.yhat);
    out += "\n";
  }
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  os.flush();
  if (!os) throw InputError("write to '" + path + "' failed");
}

void save_labels(const std::string& path,
                 const std::vector<std::pair<std::string, ProbVec>>& labels) {
  if (labels.empty()) throw InputError("no labels to save");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  std::string out = "sample_id" + prob_header("y", labels[0].second.size()) + "\n";
  for (const auto& [id, y] : labels) {
    out += id;
    write_probs(out, y);
    out += "\n";
  }
  os.write(out.data(), static_cast<std::streamsize>(out.size()));
  os.flush();
  if (!os) throw InputError("write to '" + path + "' failed");
}

LabelTable load_label_table(const std::string& path) {
  const std::vector<std::string> lines = read_lines(path);
  if (lines.empty()) throw InputError("'" + path + "' is empty");
  const std::vector<std::string> head = split_fields(trimmed(lines[0]));

  LabelTable out;
  if (head.size() >= 2 && head[0] == "sample_id" && head[1] == "split") {
    const PairedDataset pairs = load_pairs(path);
    out.k = pairs.k;
    for (const auto& r : pairs.rows) {
      out.ids.push_back(r.sample_id);
      out.splits.push_back(r.split);
      out.y.push_back(r.y);
      out.yhat.push_back(r.yhat);
    }
    return out;
  }

  if (head.size() < 3 || head[0] != "sample_id")
    throw InputError("'" + path + "' line 1: expected a labels.csv or pairs.csv header");
  const std::size_t k = head.size() - 1;
  for (std::size_t c = 0; c < k; ++c)
    if (head[1 + c] != "y_" + std::to_string(c))
      throw InputError("'" + path + "' line 1: expected a labels.csv or pairs.csv header");

  out.k = k;
  std::unordered_set<std::string> seen;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t lineno = i + 1;
    if (trimmed(lines[i]).empty()) continue;
    const std::vector<std::string> fields = split_fields(lines[i]);
    if (fields.size() != 1 + k)
      throw InputError(at_line(path, lineno) + "expected " + std::to_string(1 + k) +
                       " fields, got " + std::to_string(fields.size()));
    const std::string id = trimmed(fields[0]);
    if (id.empty()) throw InputError(at_line(path, lineno) + "empty sample id");
    if (!seen.insert(id).second)
      throw InputError(at_line(path, lineno) + "duplicate sample id '" + id + "'");
    out.ids.push_back(id);
    out.y.push_back(parse_prob_vec(path, lineno, fields, 1, k));
  }
  if (out.ids.empty()) throw InputError("'" + path + "' holds no labels");
  return out;
}

void save_tensor(const std::string& path, const EvaluatorSamples& samples) {
  if (samples.data.size() != samples.n * samples.b * samples.k)
    throw InvariantError("tensor data size does not match its shape");
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  os.write("SEVT0001", 8);
  wire::write_u64(os, samples.n);
  wire::write_u64(os, samples.b);
  wire::write_u64(os, samples.k);
  wire::write_f64(os, samples.data.data(), samples.data.size());
  os.flush();
  if (!os) throw InputError("write to '" + path + "' failed");
}

EvaluatorSamples load_tensor(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw InputError("cannot open tensor file '" + path + "'");
  char magic[8];
  is.read(magic, 8);
  if (!is || std::memcmp(magic, "SEVT0001", 8) != 0)
    throw InputError("'" + path + "' is not a tensor file (bad magic)");
  EvaluatorSamples out;
  out.n = wire::read_u64(is);
  out.b = wire::read_u64(is);
  out.k = wire::read_u64(is);
  if (!is) throw InputError("'" + path + "' header is truncated");
  const std::uint64_t limit = std::uint64_t(1) << 40;  // 8 TiB of doubles; reject corrupt shapes
  if (out.n > limit || out.b > limit || out.k > limit ||
      (out.b && out.k && out.n > limit / out.b / out.k))
    throw InputError("'" + path + "' has a corrupt shape header");
  const std::size_t total = out.n * out.b * out.k;
  out.data = wire::read_f64(is, total);
  if (!is) throw InputError("'" + path + "' payload is truncated");
  char extra;
  if (is.read(&extra, 1))
    throw InputError("'" + path + "' has trailing bytes after the payload");
  for (double v : out.data)
    if (!std::isfinite(v))
      throw InputError("'" + path + "' holds a non-finite value");
  return out;
}

std::pair<PairedDataset, PairedDataset> split_half_shuffled(const PairedDataset& pairs,
                                                            std::uint64_t seed) {
  const std::size_t n = pairs.rows.size();
  if (n < 2) throw InputError("split needs at least 2 rows, got " + std::to_string(n));
  std::vector<PairRow> rows = pairs.rows;
  RngStream rng(seed);
  for (std::size_t i = n - 1; i >= 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.next_u64() % (i + 1));
    std::swap(rows[i], rows[j]);
  }
  const std::size_t fit_n = (n + 1) / 2;
  PairedDataset fit, eval;
  fit.k = eval.k = pairs.k;
  fit.rows.assign(rows.begin(), rows.begin() + static_cast<long>(fit_n));
  eval.rows.assign(rows.begin() + static_cast<long>(fit_n), rows.end());
  return {std::move(fit), std::move(eval)};
}

Histogram histogram(const std::vector<double>& values, std::size_t bins) {
  if (bins == 0) throw InputError("histogram needs at least 1 bin");
  Histogram out;
  double lo = 0, hi = 0;
  std::size_t finite = 0;
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    if (finite == 0) {
      lo = hi = v;
    } else {
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    ++finite;
  }
  if (finite == 0) return out;
  if (lo == hi) {
    out.edges = {lo, hi};
    out.counts = {finite};
    return out;
  }
  out.edges.resize(bins + 1);
  const double span = hi - lo;
  for (std::size_t i = 0; i <= bins; ++i)
    out.edges[i] = lo + span * static_cast<double>(i) / static_cast<double>(bins);
  out.counts.assign(bins, 0);
  for (double v : values) {
    if (!std::isfinite(v)) continue;
    auto idx = static_cast<std::size_t>((v - lo) / span * static_cast<double>(bins));
    out.counts[std::min(idx, bins - 1)] += 1;
  }
  return out;
}

MeasureRecord summarize_measure(const std::string& name, const std::vector<double>& values,
                                double mass, std::size_t bins) {
  if (values.empty()) throw InputError("cannot summarize an empty measure distribution");
  const SummaryStats stats = summary_stats(values);
  MeasureRecord rec;
  rec.measure_name = name;
  rec.count = stats.count;
  rec.mean = stats.mean;
  rec.median = stats.median;
  rec.hpdi = hpdi(values, mass);
  rec.rtci = rtci(values, mass);
  rec.hist = histogram(values, bins);
  return rec;
}

nlohmann::ordered_json json_double(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0 ? "inf" : "-inf";
}

nlohmann::ordered_json measure_record_json(const MeasureRecord& record) {
  nlohmann::ordered_json hist;
  auto edges = nlohmann::ordered_json::array();
  for (double e : record.hist.edges) edges.push_back(json_double(e));
  hist["edges"] = std::move(edges);
  hist["counts"] = record.hist.counts;
  return {{"measure_name", record.measure_name},
          {"count", record.count},
          {"mean", json_double(record.mean)},
          {"median", json_double(record.median)},
          {"hpdi",
           {{"lower", json_double(record.hpdi.lower)},
            {"upper", json_double(record.hpdi.upper)},
            {"mass", record.hpdi.mass}}},
          {"rtci", {{"upper", json_double(record.rtci.upper)}, {"mass", record.rtci.mass}}},
          {"histogram", std::move(hist)}};
}

void save_report(const std::string& path, const nlohmann::ordered_json& report) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw InputError("cannot open '" + path + "' for writing");
  const std::string text = report.dump(2) + "\n";
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.flush();
  if (!os) throw InputError("write to '" + path + "' failed");
}

}  // namespace simplex_eval
