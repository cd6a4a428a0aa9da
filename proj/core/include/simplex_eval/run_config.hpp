#ifndef SIMPLEX_EVAL_RUN_CONFIG_HPP
#define SIMPLEX_EVAL_RUN_CONFIG_HPP

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "simplex_eval/bnn_evaluator.hpp"
#include "simplex_eval/evaluators.hpp"
#include "simplex_eval/hmc_engine.hpp"

namespace simplex_eval {

// JSON run configuration shared by the commands.  Schema-validated up
// front: unknown keys are rejected naming their path, so typos never pass
// silently.  Command-line flags override whatever the file sets.
//
//   {
//     "evaluator": "bnn",              // uniform | mle-dirichlet | ndod | ndod-zero | bnn
//     "seed": 0,
//     "draws": 14000,                  // B, draws per label
//     "mass": 0.95,                    // credible-interval mass
//     "measures": ["l2"],              // any of l2, kl, auc
//     "kl_eps": 1e-10,
//     "per_split": true,
//     "evaluators": [...],             // exp1 only; defaults to all five
//     "bnn":  { "hidden_units": 0, "sigma2": 0.1, "box_bound": 0 },
//     "ndod": { "max_attempts": 10000 },
//     "hmc":  { "leapfrog_steps": 3, "target_accept": 0.8, "n_chains": 4,
//               "adapt_rounds": 100, "adapt_round_size": 50, "adapt_eta0": 1,
//               "init_step_min": 0.001, "init_step_max": 0.1,
//               "convergence_window": 10000, "slope_threshold": 1e-7,
//               "slope_reference_window": 1000000, "cross_chain_tol": 3,
//               "check_interval": 2500, "max_iterations": 400000,
//               "target_draws": 14000, "max_lag": 2000 }
//   }
//
// hmc.target_draws follows the top-level draw count unless set explicitly.
struct RunConfig {
  std::string evaluator = "bnn";
  std::uint64_t seed = 0;
  std::size_t draws = 14000;
  double mass = 0.95;
  std::vector<std::string> measures = {"l2"};
  double kl_eps = 1e-10;
  bool per_split = true;
  std::vector<std::string> evaluators = {"uniform", "mle-dirichlet", "ndod", "ndod-zero",
                                         "bnn"};
  BnnConfig bnn;
  std::size_t ndod_max_attempts = 10000;
  HmcConfig hmc;

  static RunConfig from_json(const nlohmann::ordered_json& j);
  static RunConfig load(const std::string& path);
  nlohmann::ordered_json to_json() const;
};

// Unfitted evaluator of the configured kind.
std::unique_ptr<Evaluator> make_evaluator(const std::string& kind_name, const RunConfig& cfg);

}  // namespace simplex_eval

#endif
