#ifndef SIMPLEX_EVAL_SIMULATION_HPP
#define SIMPLEX_EVAL_SIMULATION_HPP

#include <cstddef>
#include <vector>

#include "simplex_eval/paired_data.hpp"
#include "simplex_eval/rng.hpp"
#include "simplex_eval/simplex_geometry.hpp"

namespace simplex_eval {

// Synthetic ground truth: labels drawn from Dirichlet(alpha), predictions
// perturbed by isotropic noise projected onto the zero-sum subspace and
// rejection-resampled back onto the simplex.
struct SimConfig {
  std::vector<double> alpha;    // concentrations; K = alpha.size()
  std::size_t n_train = 1000;
  std::size_t n_test = 1000;
  double noise_var = 1e-4;      // per-component variance before projection
  std::size_t max_attempts = 10000;
};

std::vector<ProbVec> simulate_labels(const std::vector<double>& alpha, std::size_t n,
                                     RngStream& rng);

// y + (eps - mean(eps)) with eps ~ N(0, noise_var I_K), redrawn until the
// point lands on the simplex; ResamplingError after max_attempts.
ProbVec noisy_prediction(const ProbVec& y, double noise_var, std::size_t max_attempts,
                         RngStream& rng);

// Full train/test dataset with ids sim-000000, sim-000001, ...  Each sample
// owns a derived stream keyed by its index, so the dataset is identical for
// any worker count.
PairedDataset simulate_dataset(const SimConfig& cfg, RngStream& rng);

}  // namespace simplex_eval

#endif
