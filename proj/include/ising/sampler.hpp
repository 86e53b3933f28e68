#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Dense>

#include "ising/model.hpp"

namespace ising {

// Configurations recorded from a Gibbs chain, one per kept sweep.
struct SampleSet {
  std::vector<SpinConfiguration> configurations;

  int count() const { return static_cast<int>(configurations.size()); }
};

// Empirical moments of a sample set (population-normalized, divisor D).
// sample_count == 0 marks statistics that came from exact enumeration
// rather than from samples.
struct DataStatistics {
  Eigen::VectorXd means;       // per-spin sample means
  Eigen::MatrixXd covariance;  // connected covariance, diagonal 1 - mean^2
  long sample_count = 0;
};

// Heat-bath Gibbs sampler. One sweep updates every spin once, in fixed
// index order 0..n-1, each from p(s_i = +1 | rest) = sigma(2 (h_i + sum_j
// J_ij s_j)). Runs `burn_in` discarded sweeps, then `sweeps * thin` more,
// recording every thin-th, so the result holds exactly `sweeps`
// configurations. Fully deterministic given `seed`.
SampleSet gibbs_sample(const IsingModel& model, long sweeps, long burn_in,
                       int thin, std::uint64_t seed);

// Moments of a sample set. Spin sums are accumulated in exact integer
// arithmetic, so the result is permutation invariant, bit-exactly
// symmetric, and satisfies C_ii = 1 - mean_i^2 identically.
DataStatistics statistics(const SampleSet& samples);

}  // namespace ising
