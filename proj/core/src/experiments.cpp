#include "simplex_eval/experiments.hpp"

#include <algorithm>
#include <utility>

#include "simplex_eval/data_io.hpp"
#include "simplex_eval/errors.hpp"
#include "simplex_eval/measures.hpp"

namespace simplex_eval {

namespace {

MeasureRecord half_distances(const Evaluator& ev, const PairedDataset& half,
                             std::size_t draws, double mass, RngStream& rng) {
  const EvaluatorSamples samples = ev.sample(half.labels(), draws, rng);
  const MeasureDistribution dist = measure_distribution(
      MeasureKind::normalized_euclidean, half.predictions(), samples);
  return summarize_measure(dist.measure_name, dist.values, mass);
}

}  // namespace

nlohmann::ordered_json run_exp1(const PairedDataset& pairs, const RunConfig& cfg) {
  pairs.validate();
  const auto [fit_half, eval_half] = split_half_shuffled(pairs, cfg.seed);
  const RngStream root(cfg.seed);

  nlohmann::ordered_json evaluators = nlohmann::ordered_json::object();
  std::vector<std::pair<double, std::string>> by_rtci;
  for (const std::string& name : cfg.evaluators) {
    const auto kind_idx = static_cast<std::uint64_t>(evaluator_kind_from_name(name));
    nlohmann::ordered_json entry;
    try {
      const std::unique_ptr<Evaluator> ev = make_evaluator(name, cfg);
      RngStream fit_rng = root.derive(1, kind_idx);
      ev->fit(fit_half, fit_rng);
      RngStream fit_sample_rng = root.derive(2, kind_idx);
      const MeasureRecord fit_rec =
          half_distances(*ev, fit_half, cfg.draws, cfg.mass, fit_sample_rng);
      RngStream eval_sample_rng = root.derive(3, kind_idx);
      const MeasureRecord eval_rec =
          half_distances(*ev, eval_half, cfg.draws, cfg.mass, eval_sample_rng);
      entry["status"] = "succeeded";
      entry["model"] = ev->describe();
      entry["fit_half"] = measure_record_json(fit_rec);
      entry["eval_half"] = measure_record_json(eval_rec);
      by_rtci.emplace_back(eval_rec.rtci.upper, name);
    } catch (const ConvergenceError& e) {  // ResamplingError included
      entry = {{"status", "failed"}, {"error", e.what()}};
    }
    evaluators[name] = std::move(entry);
  }

  std::stable_sort(by_rtci.begin(), by_rtci.end(),
                   [](const auto& a, const auto& b) { return a.first < b.first; });
  auto ranking = nlohmann::ordered_json::array();
  for (const auto& [upper, name] : by_rtci) {
    (void)upper;
    ranking.push_back(name);
  }

  return {{"experiment", "exp1"},
          {"seed", cfg.seed},
          {"k", pairs.k},
          {"draws", cfg.draws},
          {"mass", cfg.mass},
          {"n_fit", fit_half.rows.size()},
          {"n_eval", eval_half.rows.size()},
          {"evaluators", std::move(evaluators)},
          {"ranking", std::move(ranking)}};
}

}  // namespace simplex_eval
