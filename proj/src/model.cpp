#include "ising/model.hpp"

#include <cmath>
#include <string>

#include "ising/errors.hpp"
#include "ising/rng.hpp"

namespace ising {

IsingModel::IsingModel(Graph graph, std::vector<double> couplings, std::vector<double> biases)
    : graph_(std::move(graph)), couplings_(std::move(couplings)), biases_(std::move(biases)) {
  if (static_cast<int>(couplings_.size()) != graph_.edge_count())
    throw ConfigError("couplings size does not match edge count");
  if (static_cast<int>(biases_.size()) != graph_.vertex_count())
    throw ConfigError("biases size does not match vertex count");
  for (double j : couplings_)
    if (!std::isfinite(j)) throw ConfigError("non-finite coupling");
  for (double h : biases_)
    if (!std::isfinite(h)) throw ConfigError("non-finite bias");
}

double IsingModel::energy(const SpinConfiguration& spins) const {
  double e = 0.0;
  const auto& edges = graph_.edges();
  for (int k = 0; k < graph_.edge_count(); ++k)
    e -= couplings_[k] * spins[edges[k].i] * spins[edges[k].j];
  for (int i = 0; i < graph_.vertex_count(); ++i) e -= biases_[i] * spins[i];
  return e;
}

std::vector<double> generate_couplings(const Graph& graph, CouplingRegime regime, double omega,
                                       std::uint64_t rng_seed) {
  if (omega < 0) throw ConfigError("omega must be nonnegative");
  Rng rng(rng_seed);
  std::vector<double> J(graph.edge_count());
  for (auto& j : J)
    j = regime == CouplingRegime::attractive ? rng.uniform(0.0, omega)
                                             : rng.uniform(-omega, omega);
  return J;
}

std::vector<double> generate_biases(const Graph& graph, std::uint64_t rng_seed) {
  Rng rng(rng_seed);
  std::vector<double> h(graph.vertex_count());
  for (auto& hi : h) hi = rng.uniform(-0.05, 0.05);
  return h;
}

void EdgeAppearance::validate(const Graph& graph, double sum_tolerance) const {
  if (static_cast<int>(rho.size()) != graph.edge_count())
    throw ConfigError("rho size does not match edge count");
  double sum = 0.0;
  for (double r : rho) {
    if (!(r > 0.0 && r <= 1.0))
      throw DomainError("edge appearance probability outside (0, 1]: " + std::to_string(r));
    sum += r;
  }
  const double target = graph.vertex_count() - 1;
  if (std::abs(sum - target) > sum_tolerance * std::max(1.0, target))
    throw DomainError("sum of rho (" + std::to_string(sum) + ") != |V|-1 (" +
                      std::to_string(target) + ")");
}

EdgeAppearance uniform_edge_appearance(const Graph& graph) {
  if (graph.edge_count() == 0) throw DomainError("graph has no edges; rho undefined");
  if (!graph.connected()) throw DomainError("graph is disconnected; no spanning tree exists");
  const double value = graph.is_tree()
                           ? 1.0
                           : static_cast<double>(graph.vertex_count() - 1) / graph.edge_count();
  return EdgeAppearance{std::vector<double>(graph.edge_count(), value)};
}

}  // namespace ising
