#pragma once

#include <cstdint>
#include <vector>

#include "ising/model.hpp"
#include "ising/sampler.hpp"

namespace ising {

enum class MomentEstimator { exact, mcmc };

struct LearnConfig {
  double learning_rate = 0.1;
  int n_updates = 10000;
  MomentEstimator estimator = MomentEstimator::exact;
  // Sweeps of the persistent chain per gradient evaluation (mcmc only).
  int mc_steps_per_gradient = 100;
  std::uint64_t rng_seed = 0;
  // Early stop when the moment residual drops to tol; 0 disables.
  double tol = 0.0;
};

struct LearnTrace {
  // Max-norm moment mismatch before each update, plus one final entry for
  // the returned model, so residuals.back() describes `model`.
  std::vector<double> residuals;
  // Per-sample data log-likelihood at the same points (exact estimator
  // only; empty in mcmc mode).
  std::vector<double> log_likelihoods;
  IsingModel model;
};

// Moment-matching gradient ascent on the likelihood:
//   h += alpha (mean_data - mean_model), J += alpha (chi_data - chi_model)
// over the edges of `graph`, starting from J = 0 and h = artanh(clipped
// data means). Model moments come from exact enumeration or from a
// persistent Gibbs chain. Throws ConvergenceError if an update produces a
// non-finite parameter.
LearnTrace gradient_ascent(const DataStatistics& stats, const Graph& graph,
                           const LearnConfig& config);

}  // namespace ising
