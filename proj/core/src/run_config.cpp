#include "simplex_eval/run_config.hpp"

#include <algorithm>
#include <fstream>

#include "simplex_eval/errors.hpp"

namespace simplex_eval {

namespace {

using json = nlohmann::ordered_json;

void reject_unknown(const json& j, std::initializer_list<const char*> allowed,
                    const std::string& prefix) {
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (std::none_of(allowed.begin(), allowed.end(),
                     [&](const char* a) { return key == a; }))
      throw InputError("config: unknown key '" + prefix + key + "'");
  }
}

template <typename T>
void take(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

void check(bool ok, const std::string& msg) {
  if (!ok) throw InputError("config: " + msg);
}

}  // namespace

RunConfig RunConfig::from_json(const json& j) {
  RunConfig cfg;
  check(j.is_object(), "top level must be a JSON object");
  reject_unknown(j,
                 {"evaluator", "seed", "draws", "mass", "measures", "kl_eps", "per_split",
                  "evaluators", "bnn", "ndod", "hmc"},
                 "");
  try {
    take(j, "evaluator", cfg.evaluator);
    take(j, "seed", cfg.seed);
    take(j, "draws", cfg.draws);
    take(j, "mass", cfg.mass);
    take(j, "measures", cfg.measures);
    take(j, "kl_eps", cfg.kl_eps);
    take(j, "per_split", cfg.per_split);
    take(j, "evaluators", cfg.evaluators);
    if (j.contains("bnn")) {
      const json& b = j.at("bnn");
      reject_unknown(b, {"hidden_units", "sigma2", "box_bound"}, "bnn.");
      take(b, "hidden_units", cfg.bnn.hidden_units);
      take(b, "sigma2", cfg.bnn.sigma2);
      take(b, "box_bound", cfg.bnn.box_bound);
    }
    if (j.contains("ndod")) {
      const json& n = j.at("ndod");
      reject_unknown(n, {"max_attempts"}, "ndod.");
      take(n, "max_attempts", cfg.ndod_max_attempts);
    }
    if (j.contains("hmc")) {
      const json& h = j.at("hmc");
      reject_unknown(h,
                     {"leapfrog_steps", "target_accept", "n_chains", "adapt_rounds",
                      "adapt_round_size", "adapt_eta0", "init_step_min", "init_step_max",
                      "convergence_window", "slope_threshold", "slope_reference_window",
                      "cross_chain_tol", "check_interval", "max_iterations", "target_draws",
                      "max_lag", "trace_capacity"},
                     "hmc.");
      take(h, "leapfrog_steps", cfg.hmc.leapfrog_steps);
      take(h, "target_accept", cfg.hmc.target_accept);
      take(h, "n_chains", cfg.hmc.n_chains);
      take(h, "adapt_rounds", cfg.hmc.adapt_rounds);
      take(h, "adapt_round_size", cfg.hmc.adapt_round_size);
      take(h, "adapt_eta0", cfg.hmc.adapt_eta0);
      take(h, "init_step_min", cfg.hmc.init_step_min);
      take(h, "init_step_max", cfg.hmc.init_step_max);
      take(h, "convergence_window", cfg.hmc.convergence_window);
      take(h, "slope_threshold", cfg.hmc.slope_threshold);
      take(h, "slope_reference_window", cfg.hmc.slope_reference_window);
      take(h, "cross_chain_tol", cfg.hmc.cross_chain_tol);
      take(h, "check_interval", cfg.hmc.check_interval);
      take(h, "max_iterations", cfg.hmc.max_iterations);
      take(h, "max_lag", cfg.hmc.max_lag);
      take(h, "trace_capacity", cfg.hmc.trace_capacity);
      if (h.contains("target_draws")) {
        take(h, "target_draws", cfg.hmc.target_draws);
        check(cfg.hmc.target_draws >= cfg.draws, "hmc.target_draws must be >= draws");
      } else {
        cfg.hmc.target_draws = cfg.draws;
      }
    } else {
      cfg.hmc.target_draws = cfg.draws;
    }
  } catch (const json::exception& e) {
    throw InputError(std::string("config: ") + e.what());
  }

  evaluator_kind_from_name(cfg.evaluator);
  check(cfg.draws >= 1, "draws must be >= 1");
  check(cfg.mass > 0 && cfg.mass <= 1, "mass must be in (0, 1]");
  check(!cfg.measures.empty(), "measures must not be empty");
  for (const auto& m : cfg.measures)
    check(m == "l2" || m == "kl" || m == "auc", "unknown measure '" + m + "'");
  check(cfg.kl_eps >= 0, "kl_eps must be >= 0");
  check(!cfg.evaluators.empty(), "evaluators must not be empty");
  for (const auto& e : cfg.evaluators) evaluator_kind_from_name(e);
  for (std::size_t i = 0; i < cfg.evaluators.size(); ++i)
    for (std::size_t l = i + 1; l < cfg.evaluators.size(); ++l)
      check(cfg.evaluators[i] != cfg.evaluators[l],
            "duplicate evaluator '" + cfg.evaluators[i] + "'");
  check(cfg.bnn.hidden_units >= 0, "bnn.hidden_units must be >= 0");
  check(cfg.bnn.sigma2 > 0, "bnn.sigma2 must be positive");
  check(cfg.bnn.box_bound >= 0, "bnn.box_bound must be >= 0");
  check(cfg.ndod_max_attempts >= 1, "ndod.max_attempts must be >= 1");
  const HmcConfig& h = cfg.hmc;
  check(h.leapfrog_steps >= 1, "hmc.leapfrog_steps must be >= 1");
  check(h.target_accept > 0 && h.target_accept < 1, "hmc.target_accept must be in (0, 1)");
  check(h.n_chains >= 1, "hmc.n_chains must be >= 1");
  check(h.adapt_rounds >= 0, "hmc.adapt_rounds must be >= 0");
  check(h.adapt_round_size >= 1, "hmc.adapt_round_size must be >= 1");
  check(h.adapt_eta0 > 0, "hmc.adapt_eta0 must be positive");
  check(h.init_step_min > 0 && h.init_step_max >= h.init_step_min,
        "hmc.init_step_min/max must be positive and ordered");
  check(h.convergence_window >= 10, "hmc.convergence_window must be >= 10");
  check(h.slope_threshold > 0, "hmc.slope_threshold must be positive");
  check(h.slope_reference_window >= 1, "hmc.slope_reference_window must be >= 1");
  check(h.cross_chain_tol > 0, "hmc.cross_chain_tol must be positive");
  check(h.check_interval >= 1, "hmc.check_interval must be >= 1");
  check(h.max_iterations >= h.convergence_window,
        "hmc.max_iterations must be >= hmc.convergence_window");
  check(h.max_lag >= 1, "hmc.max_lag must be >= 1");
  check(h.trace_capacity >= h.convergence_window,
        "hmc.trace_capacity must be >= hmc.convergence_window");
  return cfg;
}

RunConfig RunConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw InputError("cannot open config file '" + path + "'");
  json j;
  try {
    is >> j;
  } catch (const json::parse_error& e) {
    throw InputError("config file '" + path + "' is not valid JSON: " + e.what());
  }
  return from_json(j);
}

nlohmann::ordered_json RunConfig::to_json() const {
  return {{"evaluator", evaluator},
          {"seed", seed},
          {"draws", draws},
          {"mass", mass},
          {"measures", measures},
          {"kl_eps", kl_eps},
          {"per_split", per_split},
          {"evaluators", evaluators},
          {"bnn",
           {{"hidden_units", bnn.hidden_units},
            {"sigma2", bnn.sigma2},
            {"box_bound", bnn.box_bound}}},
          {"ndod", {{"max_attempts", ndod_max_attempts}}},
          {"hmc",
           {{"leapfrog_steps", hmc.leapfrog_steps},
            {"target_accept", hmc.target_accept},
            {"n_chains", hmc.n_chains},
            {"adapt_rounds", hmc.adapt_rounds},
            {"adapt_round_size", hmc.adapt_round_size},
            {"adapt_eta0", hmc.adapt_eta0},
            {"init_step_min", hmc.init_step_min},
            {"init_step_max", hmc.init_step_max},
            {"convergence_window", hmc.convergence_window},
            {"slope_threshold", hmc.slope_threshold},
            {"slope_reference_window", hmc.slope_reference_window},
            {"cross_chain_tol", hmc.cross_chain_tol},
            {"check_interval", hmc.check_interval},
            {"max_iterations", hmc.max_iterations},
            {"target_draws", hmc.target_draws},
            {"max_lag", hmc.max_lag},
            {"trace_capacity", hmc.trace_capacity}}}};
}

std::unique_ptr<Evaluator> make_evaluator(const std::string& kind_name, const RunConfig& cfg) {
  switch (evaluator_kind_from_name(kind_name)) {
    case EvaluatorKind::uniform_dirichlet:
      return std::make_unique<UniformDirichletEvaluator>();
    case EvaluatorKind::mle_dirichlet:
      return std::make_unique<MleDirichletEvaluator>();
    case EvaluatorKind::ndod:
      return std::make_unique<NdodEvaluator>(false, cfg.ndod_max_attempts);
    case EvaluatorKind::ndod_zero_mean:
      return std::make_unique<NdodEvaluator>(true, cfg.ndod_max_attempts);
    case EvaluatorKind::bnn:
      return std::make_unique<BnnEvaluator>(cfg.bnn, cfg.hmc);
  }
  throw InvariantError("unhandled evaluator kind");
}

}  // namespace simplex_eval
