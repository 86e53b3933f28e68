#include "ising/exact.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "ising/errors.hpp"

namespace ising {

namespace {

void check_size(const IsingModel& model) {
  const int n = model.graph().vertex_count();
  if (n > kMaxExactSpins)
    throw SizeError("exact enumeration capped at " + std::to_string(kMaxExactSpins) +
                    " spins, got " + std::to_string(n));
}

// Flattened adjacency: per vertex, (neighbor, coupling).
std::vector<std::vector<std::pair<int, double>>> weighted_adjacency(const IsingModel& model) {
  std::vector<std::vector<std::pair<int, double>>> adj(model.graph().vertex_count());
  const auto& edges = model.graph().edges();
  for (int k = 0; k < model.graph().edge_count(); ++k) {
    adj[edges[k].i].emplace_back(edges[k].j, model.couplings()[k]);
    adj[edges[k].j].emplace_back(edges[k].i, model.couplings()[k]);
  }
  return adj;
}

// Visits all 2^n states in binary-reflected Gray code order, starting from
// all -1. visit(energy) is called once per state; the running energy is kept
// in long double so incremental drift stays below ~1e-12 even at the size cap.
template <typename Visit>
void enumerate_states(const IsingModel& model, std::vector<int>& spins, Visit&& visit) {
  const int n = model.graph().vertex_count();
  const auto adj = weighted_adjacency(model);
  const auto& h = model.biases();

  spins.assign(n, -1);
  long double energy = 0.0L;
  for (int k = 0; k < model.graph().edge_count(); ++k)
    energy -= model.couplings()[k] * spins[model.graph().edges()[k].i] *
              spins[model.graph().edges()[k].j];
  for (int i = 0; i < n; ++i) energy -= h[i] * spins[i];

  visit(energy);
  const std::uint64_t count = 1ULL << n;
  for (std::uint64_t g = 1; g < count; ++g) {
    const int i = std::countr_zero(g);
    long double field = h[i];
    for (auto [j, Jij] : adj[i]) field += Jij * spins[j];
    energy += 2.0L * spins[i] * field;
    spins[i] = -spins[i];
    visit(energy);
  }
}

}  // namespace

double log_partition(const IsingModel& model) {
  check_size(model);
  std::vector<int> spins;

  long double max_exponent = -1e300L;
  enumerate_states(model, spins, [&](long double e) {
    if (-e > max_exponent) max_exponent = -e;
  });

  long double sum = 0.0L;
  enumerate_states(model, spins,
                   [&](long double e) { sum += std::exp(-e - max_exponent); });
  return static_cast<double>(max_exponent + std::log(sum));
}

ExactMoments exact_moments(const IsingModel& model) {
  check_size(model);
  const int n = model.graph().vertex_count();
  std::vector<int> spins;

  long double max_exponent = -1e300L;
  enumerate_states(model, spins, [&](long double e) {
    if (-e > max_exponent) max_exponent = -e;
  });

  long double total = 0.0L;
  std::vector<long double> first(n, 0.0L);
  std::vector<long double> second(static_cast<std::size_t>(n) * n, 0.0L);
  enumerate_states(model, spins, [&](long double e) {
    const long double w = std::exp(-e - max_exponent);
    total += w;
    for (int i = 0; i < n; ++i) {
      if (spins[i] > 0) first[i] += w;       // accumulate w * (s_i+1)/2 pattern
      for (int j = i + 1; j < n; ++j)
        if (spins[i] == spins[j]) second[static_cast<std::size_t>(i) * n + j] += w;
    }
  });

  ExactMoments out;
  out.log_partition = static_cast<double>(max_exponent + std::log(total));
  out.means.resize(n);
  out.pair_moments.resize(n, n);
  out.covariance.resize(n, n);
  for (int i = 0; i < n; ++i)
    out.means[i] = static_cast<double>(2.0L * first[i] / total - 1.0L);
  for (int i = 0; i < n; ++i) {
    out.pair_moments(i, i) = 1.0;
    for (int j = i + 1; j < n; ++j) {
      const double pm =
          static_cast<double>(2.0L * second[static_cast<std::size_t>(i) * n + j] / total - 1.0L);
      out.pair_moments(i, j) = out.pair_moments(j, i) = pm;
    }
  }
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      out.covariance(i, j) = i == j ? 1.0 - out.means[i] * out.means[i]
                                    : out.pair_moments(i, j) - out.means[i] * out.means[j];
  return out;
}

ExactMoments finite_difference_moments(const IsingModel& model, double step) {
  check_size(model);
  const int n = model.graph().vertex_count();
  const auto& graph = model.graph();

  auto phi_shifted = [&](int hi, double dh, int hj, double dh2) {
    std::vector<double> h = model.biases();
    h[hi] += dh;
    if (hj >= 0) h[hj] += dh2;
    return log_partition(IsingModel(graph, model.couplings(), h));
  };

  ExactMoments out;
  out.means.resize(n);
  for (int i = 0; i < n; ++i)
    out.means[i] = (phi_shifted(i, step, -1, 0) - phi_shifted(i, -step, -1, 0)) / (2 * step);

  out.pair_moments = Eigen::MatrixXd::Zero(n, n);
  out.pair_moments.diagonal().setOnes();
  for (int k = 0; k < graph.edge_count(); ++k) {
    std::vector<double> J = model.couplings();
    J[k] += step;
    const double up = log_partition(IsingModel(graph, J, model.biases()));
    J[k] -= 2 * step;
    const double down = log_partition(IsingModel(graph, J, model.biases()));
    const auto [i, j] = graph.edges()[k];
    out.pair_moments(i, j) = out.pair_moments(j, i) = (up - down) / (2 * step);
  }

  const double phi0 = log_partition(model);
  out.covariance.resize(n, n);
  for (int i = 0; i < n; ++i) {
    out.covariance(i, i) =
        (phi_shifted(i, step, -1, 0) - 2 * phi0 + phi_shifted(i, -step, -1, 0)) / (step * step);
    for (int j = i + 1; j < n; ++j) {
      const double d2 = (phi_shifted(i, step, j, step) - phi_shifted(i, step, j, -step) -
                         phi_shifted(i, -step, j, step) + phi_shifted(i, -step, j, -step)) /
                        (4 * step * step);
      out.covariance(i, j) = out.covariance(j, i) = d2;
      if (graph.edge_index(i, j) < 0)
        out.pair_moments(i, j) = out.pair_moments(j, i) = d2 + out.means[i] * out.means[j];
    }
  }
  out.log_partition = phi0;
  return out;
}

}  // namespace ising
