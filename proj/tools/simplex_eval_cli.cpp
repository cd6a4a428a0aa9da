// Command-line front end: simulate datasets, aggregate annotations, fit
// evaluators, draw posterior sample tensors, and turn them into measure
// reports and plots.  Exit codes: 0 success, 2 input error, 3 convergence or
// resampling failure, 4 internal invariant violation.

#include <CLI11.hpp>

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "simplex_eval/data_io.hpp"
#include "simplex_eval/errors.hpp"
#include "simplex_eval/evaluators.hpp"
#include "simplex_eval/experiments.hpp"
#include "simplex_eval/measures.hpp"
#include "simplex_eval/run_config.hpp"
#include "simplex_eval/simulation.hpp"
#include "simplex_eval/svg_plot.hpp"

using namespace simplex_eval;

namespace {

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(',', start);
    if (pos == std::string::npos) {
      out.push_back(text.substr(start));
      return out;
    }
    out.push_back(text.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<double> parse_alpha(const std::string& text) {
  std::vector<double> out;
  for (const std::string& field : split_list(text)) {
    char* end = nullptr;
    const double v = std::strtod(field.c_str(), &end);
    if (field.empty() || end != field.c_str() + field.size())
      throw InputError("--alpha: '" + field + "' is not a number");
    out.push_back(v);
  }
  return out;
}

// Config file first, then flags on top; keeps the sampler bank large enough
// for the requested draw count.
struct ConfigFlags {
  std::string config_path;
  std::string evaluator;
  std::uint64_t seed = 0;
  bool seed_set = false;
  std::size_t draws = 0;

  RunConfig resolve() const {
    RunConfig cfg = config_path.empty() ? RunConfig() : RunConfig::load(config_path);
    if (!evaluator.empty()) {
      evaluator_kind_from_name(evaluator);
      cfg.evaluator = evaluator;
    }
    if (seed_set) cfg.seed = seed;
    if (draws > 0) cfg.draws = draws;
    if (cfg.hmc.target_draws < cfg.draws) cfg.hmc.target_draws = cfg.draws;
    return cfg;
  }

  void attach(CLI::App* cmd, bool with_evaluator) {
    cmd->add_option("--config", config_path, "JSON run configuration");
    if (with_evaluator)
      cmd->add_option("--evaluator", evaluator,
                      "uniform | mle-dirichlet | ndod | ndod-zero | bnn");
    cmd->add_option("--seed", seed, "random seed (overrides config)")
        ->each([this](const std::string&) { seed_set = true; });
    cmd->add_option("--draws", draws, "draws per label B (overrides config)");
  }
};

EvaluatorSamples tensor_subset(const EvaluatorSamples& t, const std::vector<std::size_t>& idx) {
  EvaluatorSamples sub;
  sub.n = idx.size();
  sub.b = t.b;
  sub.k = t.k;
  sub.data.resize(sub.n * sub.b * sub.k);
  const std::size_t row = t.b * t.k;
  for (std::size_t j = 0; j < idx.size(); ++j)
    std::memcpy(sub.data.data() + j * row, t.data.data() + idx[j] * row, row * sizeof(double));
  return sub;
}

void cmd_measure(const std::string& tensor_path, const std::string& labels_path,
                 const std::string& measures_csv, double mass, double kl_eps,
                 const std::string& out_path, const std::string& plots_dir) {
  const EvaluatorSamples tensor = load_tensor(tensor_path);
  const LabelTable table = load_label_table(labels_path);
  if (table.y.size() != tensor.n)
    throw InputError("tensor holds " + std::to_string(tensor.n) + " samples but '" +
                     labels_path + "' holds " + std::to_string(table.y.size()));
  if (table.k != tensor.k)
    throw InputError("tensor has k=" + std::to_string(tensor.k) + " but '" + labels_path +
                     "' has k=" + std::to_string(table.k));
  const std::vector<std::string> measures = split_list(measures_csv);
  for (const auto& m : measures)
    if (m != "l2" && m != "kl" && m != "auc")
      throw InputError("--measures: unknown measure '" + m + "'");
  if (!(mass > 0 && mass <= 1)) throw InputError("--mass must be in (0, 1]");

  // Groups: the file's split tags, or one combined group for plain labels.
  std::vector<std::pair<std::string, std::vector<std::size_t>>> groups;
  if (table.splits.empty()) {
    groups.emplace_back("combined", std::vector<std::size_t>());
    for (std::size_t i = 0; i < table.y.size(); ++i) groups[0].second.push_back(i);
  } else {
    for (const char* name : {"train", "test"}) {
      std::vector<std::size_t> idx;
      for (std::size_t i = 0; i < table.splits.size(); ++i)
        if (table.splits[i] == name) idx.push_back(i);
      if (!idx.empty()) groups.emplace_back(name, std::move(idx));
    }
  }

  if (!plots_dir.empty()) std::filesystem::create_directories(plots_dir);

  nlohmann::ordered_json splits = nlohmann::ordered_json::object();
  for (const auto& [split, idx] : groups) {
    const EvaluatorSamples sub = tensor_subset(tensor, idx);
    std::vector<ProbVec> y, target;
    for (std::size_t i : idx) {
      y.push_back(table.y[i]);
      // A pairs file measures draws against the actual predictor outputs; a
      // plain labels file measures them against the labels themselves.
      target.push_back(table.yhat.empty() ? table.y[i] : table.yhat[i]);
    }
    auto records = nlohmann::ordered_json::array();
    for (const auto& m : measures) {
      MeasureDistribution dist;
      if (m == "l2")
        dist = measure_distribution(MeasureKind::normalized_euclidean, target, sub);
      else if (m == "kl")
        dist = measure_distribution(MeasureKind::kl_divergence, target, sub, kl_eps);
      else
        dist = auc_distribution(y, sub);
      const MeasureRecord rec = summarize_measure(dist.measure_name, dist.values, mass);
      records.push_back(measure_record_json(rec));
      if (!plots_dir.empty()) {
        const std::string file = split + "_" + rec.measure_name + ".svg";
        write_histogram_svg((std::filesystem::path(plots_dir) / file).string(),
                            split + " " + rec.measure_name, rec.hist, rec.hpdi, rec.rtci);
      }
    }
    splits[split] = std::move(records);
  }

  save_report(out_path, {{"mass", mass}, {"kl_eps", kl_eps}, {"splits", std::move(splits)}});
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Posterior evaluation of black-box predictors on subjective tasks"};
  app.set_version_flag("--version", "0.1.0");
  app.require_subcommand(1);

  // aggregate
  std::string agg_in, agg_out;
  std::size_t agg_k = 0;
  CLI::App* agg = app.add_subcommand("aggregate", "Aggregate annotations to frequency labels");
  agg->add_option("--annotations", agg_in, "annotations.csv")->required();
  agg->add_option("--k", agg_k, "class count")->required();
  agg->add_option("--out", agg_out, "output labels.csv")->required();
  agg->callback([&] {
    save_labels(agg_out, aggregate_human_frequency(load_annotations(agg_in, agg_k)));
  });

  // simulate
  std::string sim_alpha = "10,10,10", sim_out;
  SimConfig sim_cfg;
  std::uint64_t sim_seed = 0;
  CLI::App* sim = app.add_subcommand("simulate", "Generate a synthetic pairs.csv");
  sim->add_option("--alpha", sim_alpha, "Dirichlet concentrations a,b,c (default 10,10,10)");
  sim->add_option("--n-train", sim_cfg.n_train, "training samples (default 1000)");
  sim->add_option("--n-test", sim_cfg.n_test, "test samples (default 1000)");
  sim->add_option("--noise-var", sim_cfg.noise_var, "noise variance (default 1e-4)");
  sim->add_option("--max-attempts", sim_cfg.max_attempts, "resampling cap (default 10000)");
  sim->add_option("--seed", sim_seed, "random seed");
  sim->add_option("--out", sim_out, "output pairs.csv")->required();
  sim->callback([&] {
    sim_cfg.alpha = parse_alpha(sim_alpha);
    RngStream rng(sim_seed);
    save_pairs(sim_out, simulate_dataset(sim_cfg, rng));
  });

  // fit
  std::string fit_pairs, fit_out, fit_split = "all";
  ConfigFlags fit_flags;
  CLI::App* fit = app.add_subcommand("fit", "Fit an evaluator to a pairs.csv");
  fit->add_option("--pairs", fit_pairs, "pairs.csv")->required();
  fit->add_option("--split", fit_split, "train | test | all (default all)");
  fit->add_option("--out", fit_out, "output model.bin")->required();
  fit_flags.attach(fit, true);
  fit->callback([&] {
    const RunConfig cfg = fit_flags.resolve();
    PairedDataset pairs = load_pairs(fit_pairs);
    if (fit_split != "all") {
      if (fit_split != "train" && fit_split != "test")
        throw InputError("--split must be train, test, or all");
      pairs = pairs.filter_split(fit_split);
      if (pairs.rows.empty())
        throw InputError("'" + fit_pairs + "' has no rows with split '" + fit_split + "'");
    }
    const std::unique_ptr<Evaluator> ev = make_evaluator(cfg.evaluator, cfg);
    RngStream rng(cfg.seed);
    ev->fit(pairs, rng);
    save_model(fit_out, *ev);
  });

  // sample
  std::string smp_model, smp_labels, smp_out;
  std::size_t smp_draws = 14000;
  std::uint64_t smp_seed = 0;
  CLI::App* smp = app.add_subcommand("sample", "Draw a posterior sample tensor from a model");
  smp->add_option("--model", smp_model, "model.bin")->required();
  smp->add_option("--labels", smp_labels, "labels.csv or pairs.csv")->required();
  smp->add_option("--draws", smp_draws, "draws per label B (default 14000)");
  smp->add_option("--seed", smp_seed, "random seed");
  smp->add_option("--out", smp_out, "output tensor.bin")->required();
  smp->callback([&] {
    const std::unique_ptr<Evaluator> ev = load_model(smp_model);
    const LabelTable table = load_label_table(smp_labels);
    RngStream rng(smp_seed);
    save_tensor(smp_out, ev->sample(table.y, smp_draws, rng));
  });

  // measure
  std::string mea_tensor, mea_labels, mea_measures = "l2", mea_out, mea_plots;
  double mea_mass = 0.95, mea_kl_eps = 1e-10;
  CLI::App* mea = app.add_subcommand("measure", "Summarize measure distributions of a tensor");
  mea->add_option("--tensor", mea_tensor, "tensor.bin")->required();
  mea->add_option("--labels", mea_labels, "labels.csv or pairs.csv")->required();
  mea->add_option("--measures", mea_measures, "comma list of l2,kl,auc (default l2)");
  mea->add_option("--mass", mea_mass, "credible-interval mass (default 0.95)");
  mea->add_option("--kl-eps", mea_kl_eps, "KL smoothing epsilon (default 1e-10)");
  mea->add_option("--out", mea_out, "output report.json")->required();
  mea->add_option("--plots", mea_plots, "directory for SVG histograms");
  mea->callback([&] {
    cmd_measure(mea_tensor, mea_labels, mea_measures, mea_mass, mea_kl_eps, mea_out,
                mea_plots);
  });

  // exp1
  std::string exp_pairs, exp_out;
  ConfigFlags exp_flags;
  CLI::App* exp = app.add_subcommand("exp1", "Half-split evaluator ranking experiment");
  exp->add_option("--pairs", exp_pairs, "pairs.csv")->required();
  exp->add_option("--out", exp_out, "output report.json")->required();
  exp_flags.attach(exp, false);
  exp->callback([&] {
    const RunConfig cfg = exp_flags.resolve();
    save_report(exp_out, run_exp1(load_pairs(exp_pairs), cfg));
  });

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const ConvergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const InvariantError& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 4;
  }
  return 0;
}
