#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "ising/model.hpp"
#include "ising/sampler.hpp"

namespace ising {

enum class InverseMethod { ip, bethe, sm, trw };

// Short names used in CLI flags, CSV output, and JSON ("ip", "bethe", "sm",
// "trw").
std::string method_name(InverseMethod method);
InverseMethod method_from_name(const std::string& name);

struct InverseDiagnostics {
  // Pairs (i, j), i < j, whose formula left its domain; the corresponding
  // coupling entries are NaN.
  std::vector<std::pair<int, int>> failed_pairs;
  // Ratio of largest to smallest retained eigenvalue of the covariance
  // (0 when the method never inverts the covariance).
  double condition_estimate = 0.0;
  std::vector<std::string> warnings;
};

// Full symmetric matrix of estimated couplings (zero diagonal, NaN on
// flagged pairs) plus diagnostics. Per-pair domain failures never abort an
// inversion; they are collected.
struct InferredCouplings {
  InverseMethod method = InverseMethod::ip;
  Eigen::MatrixXd couplings;
  InverseDiagnostics diagnostics;
};

// Independent-pair estimate: quarter log-ratio of the four reconstructed
// pair probabilities. Pairs with a nonpositive probability are flagged.
InferredCouplings invert_ip(const DataStatistics& stats);

// Tree-reweighted analytic inverse with per-pair appearance probabilities.
// rho_pairs must be symmetric with entries in (0, 1]; only the off-diagonal
// entries are read.
InferredCouplings invert_trw(const DataStatistics& stats,
                             const Eigen::MatrixXd& rho_pairs);

// Convenience wrapper: rho on graph edges, 1 elsewhere. A well-recovered
// model has near-zero couplings on the off-graph pairs.
InferredCouplings invert_trw(const DataStatistics& stats, const Graph& graph,
                             const EdgeAppearance& rho);

// Bethe estimate == TRW at rho = 1 on every pair (shared code path).
InferredCouplings invert_bethe(const DataStatistics& stats);

// Sessak-Monasson small-correlation expansion with the independent-pair
// resummation.
InferredCouplings invert_sm(const DataStatistics& stats);

// All four methods on one statistics object.
std::map<InverseMethod, InferredCouplings> invert_all(const DataStatistics& stats,
                                                      const Graph& graph,
                                                      const EdgeAppearance& rho);

}  // namespace ising
