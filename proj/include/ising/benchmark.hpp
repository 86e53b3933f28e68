#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ising/inverse.hpp"
#include "ising/model.hpp"

namespace ising {

struct SamplerSettings {
  long sweeps = 100000;
  long burn_in = 1000;
  int thin = 1;
};

// One reconstruction sweep: for every (omega, trial) cell, draw a model,
// estimate statistics, run the configured inverse methods, score delta_j.
struct SweepConfig {
  std::string graph_spec = "grid2d:4x4";  // grid2d:WxH | grid3d:XxYxZ | complete:N
  CouplingRegime regime = CouplingRegime::attractive;
  std::vector<double> omega_grid;  // empty -> family default
  int trials = 10;
  bool exact_stats = false;  // enumeration instead of sampling (|V| <= 24)
  SamplerSettings sampler;
  std::vector<InverseMethod> methods = {InverseMethod::ip, InverseMethod::bethe,
                                        InverseMethod::sm, InverseMethod::trw};
  std::uint64_t rng_seed = 0;
  int jobs = 1;
};

// One (method, omega, trial) result. A nonempty error means the cell
// failed (e.g. undefined metric at omega = 0) and delta_j is NaN.
struct SweepCell {
  InverseMethod method = InverseMethod::ip;
  int omega_index = 0;
  double omega = 0.0;
  int trial = 0;
  double delta_j = 0.0;
  int failed_edges = 0;  // domain-flagged graph edges, scored as J = 0
  std::string error;
};

struct MethodAggregate {
  InverseMethod method = InverseMethod::ip;
  int omega_index = 0;
  double omega = 0.0;
  double mean_delta_j = 0.0;
  double standard_error = 0.0;
  int valid_trials = 0;
};

struct ReconstructionReport {
  SweepConfig config;
  std::string version;
  std::vector<double> omega_grid;     // resolved grid actually run
  std::vector<SweepCell> cells;       // ordered by (omega_index, trial, method)
  std::vector<MethodAggregate> aggregates;  // ordered by (omega_index, method)
};

Graph parse_graph_spec(const std::string& spec);

// omega in {0.5, 1, ..., 4} for complete graphs, {0.1, ..., 1.2} otherwise.
std::vector<double> default_omega_grid(const std::string& graph_spec);

// Normalized root-square coupling distance over graph edges. Non-finite
// (domain-flagged) estimate entries contribute as J = 0. Throws DomainError
// when the truth is identically zero.
double delta_j(const InferredCouplings& estimate, const Graph& graph,
               const std::vector<double>& truth);

// Deterministic given config.rng_seed regardless of jobs: every cell derives
// its seeds as derive_seed(rng_seed, omega_index, trial) with sub-seeds 1, 2,
// 3 for couplings, biases, and the Gibbs chain. Per-cell errors are recorded,
// never propagated.
ReconstructionReport run_sweep(const SweepConfig& config);

}  // namespace ising
