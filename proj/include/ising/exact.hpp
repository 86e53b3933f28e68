#pragma once

#include <Eigen/Dense>

#include "ising/model.hpp"

namespace ising {

// Enumeration over all 2^|V| states; |V| above this throws SizeError.
inline constexpr int kMaxExactSpins = 24;

// Ground-truth moments of the Boltzmann distribution.
struct ExactMoments {
  double log_partition;
  Eigen::VectorXd means;        // <s_i>
  Eigen::MatrixXd pair_moments; // <s_i s_j>, diagonal = 1
  Eigen::MatrixXd covariance;   // <s_i s_j> - <s_i><s_j>
};

// ln Z with log-sum-exp accumulation; sequential state order (Gray code),
// bit-reproducible.
double log_partition(const IsingModel& model);

// All means and all-pairs second moments from full enumeration.
ExactMoments exact_moments(const IsingModel& model);

// Central differences of log_partition in h (means), J (edge pair moments)
// and second differences in (h_i, h_j) (covariance). Validation harness:
// slow, test use only. Off-edge entries of pair_moments are filled from the
// covariance identity.
ExactMoments finite_difference_moments(const IsingModel& model, double step = 1e-5);

}  // namespace ising
