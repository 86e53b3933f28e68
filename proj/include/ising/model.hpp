#pragma once

#include <cstdint>
#include <vector>

#include "ising/graph.hpp"

namespace ising {

// Spin values are strictly +1 / -1.
using SpinConfiguration = std::vector<std::int8_t>;

// Pairwise binary model: energy E(s) = -sum_<ij> J_ij s_i s_j - sum_i h_i s_i.
// couplings are aligned to graph.edges(); biases to vertices. All finite.
class IsingModel {
 public:
  IsingModel(Graph graph, std::vector<double> couplings, std::vector<double> biases);

  const Graph& graph() const { return graph_; }
  const std::vector<double>& couplings() const { return couplings_; }
  const std::vector<double>& biases() const { return biases_; }

  double energy(const SpinConfiguration& spins) const;

 private:
  Graph graph_;
  std::vector<double> couplings_;
  std::vector<double> biases_;
};

enum class CouplingRegime { attractive, mixed };

// Per-edge draws: attractive J ~ u[0, omega], mixed J ~ u[-omega, omega].
// Pure function of (graph, regime, omega, seed).
std::vector<double> generate_couplings(const Graph& graph, CouplingRegime regime, double omega,
                                       std::uint64_t rng_seed);

// Per-vertex h ~ u[-0.05, 0.05].
std::vector<double> generate_biases(const Graph& graph, std::uint64_t rng_seed);

// Edge appearance probabilities rho_ij in (0, 1], aligned to graph.edges().
// A distribution over spanning trees must satisfy sum rho = |V| - 1; that
// necessary condition is what validate() enforces (membership in the full
// spanning-tree polytope is not tested).
struct EdgeAppearance {
  std::vector<double> rho;

  void validate(const Graph& graph, double sum_tolerance = 1e-12) const;
};

// rho_ij = (|V|-1)/|E| on every edge. Requires a connected graph with at
// least one edge; on a tree this gives rho = 1 exactly.
EdgeAppearance uniform_edge_appearance(const Graph& graph);

}  // namespace ising
