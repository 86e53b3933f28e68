#include "ising/learner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <utility>

#include "ising/errors.hpp"
#include "ising/exact.hpp"
#include "ising/rng.hpp"

namespace ising {

namespace {

struct ModelMoments {
  std::vector<double> means;
  std::vector<double> pair_moments;  // per edge
};

// Persistent Gibbs chain reused across gradient evaluations.
class ChainEstimator {
 public:
  ChainEstimator(const Graph& graph, std::uint64_t seed)
      : graph_(graph), rng_(seed), state_(graph.vertex_count()) {
    for (auto& s : state_)
      s = rng_.uniform01() < 0.5 ? std::int8_t{-1} : std::int8_t{1};
  }

  ModelMoments estimate(const std::vector<double>& couplings,
                        const std::vector<double>& biases, int sweeps) {
    const int n = graph_.vertex_count();
    const int ne = graph_.edge_count();
    std::vector<std::int64_t> sum(n, 0), sum2(ne, 0);
    for (int t = 0; t < sweeps; ++t) {
      for (int i = 0; i < n; ++i) {
        double field = biases[i];
        for (const auto& [j, e] : graph_.neighbors(i))
          field += couplings[e] * state_[j];
        const double p_up = 1.0 / (1.0 + std::exp(-2.0 * field));
        state_[i] = rng_.uniform01() < p_up ? std::int8_t{1} : std::int8_t{-1};
      }
      for (int i = 0; i < n; ++i) sum[i] += state_[i];
      for (int k = 0; k < ne; ++k)
        sum2[k] += state_[graph_.edges()[k].i] * state_[graph_.edges()[k].j];
    }
    ModelMoments mm;
    mm.means.resize(n);
    mm.pair_moments.resize(ne);
    for (int i = 0; i < n; ++i)
      mm.means[i] = static_cast<double>(sum[i]) / sweeps;
    for (int k = 0; k < ne; ++k)
      mm.pair_moments[k] = static_cast<double>(sum2[k]) / sweeps;
    return mm;
  }

 private:
  const Graph& graph_;
  Rng rng_;
  SpinConfiguration state_;
};

}  // namespace

LearnTrace gradient_ascent(const DataStatistics& stats, const Graph& graph,
                           const LearnConfig& config) {
  const int n = graph.vertex_count();
  const int ne = graph.edge_count();
  if (static_cast<int>(stats.means.size()) != n)
    throw SizeError("gradient_ascent: statistics size does not match graph");
  if (stats.covariance.rows() != n || stats.covariance.cols() != n)
    throw SizeError("gradient_ascent: covariance shape does not match graph");
  if (!(config.learning_rate > 0.0))
    throw ConfigError("gradient_ascent: learning_rate must be > 0");
  if (config.n_updates < 1)
    throw ConfigError("gradient_ascent: n_updates must be >= 1");
  if (config.estimator == MomentEstimator::mcmc && config.mc_steps_per_gradient < 1)
    throw ConfigError("gradient_ascent: mc_steps_per_gradient must be >= 1");

  std::vector<double> target_mean(n), target_pair(ne);
  for (int i = 0; i < n; ++i) {
    target_mean[i] = stats.means[i];
    if (std::abs(target_mean[i]) > 1.0)
      throw DomainError("gradient_ascent: data mean outside [-1, 1]");
  }
  for (int k = 0; k < ne; ++k) {
    const Edge& e = graph.edges()[k];
    target_pair[k] =
        stats.covariance(e.i, e.j) + target_mean[e.i] * target_mean[e.j];
  }

  std::vector<double> couplings(ne, 0.0), biases(n);
  for (int i = 0; i < n; ++i)
    biases[i] = std::atanh(std::clamp(target_mean[i], -(1.0 - 1e-9), 1.0 - 1e-9));

  const bool exact = config.estimator == MomentEstimator::exact;
  ChainEstimator chain(graph, config.rng_seed);

  std::vector<double> residuals, log_likelihoods;
  residuals.reserve(config.n_updates + 1);

  for (int u = 0;; ++u) {
    IsingModel model(graph, couplings, biases);
    ModelMoments mm;
    if (exact) {
      const ExactMoments em = exact_moments(model);
      mm.means.assign(em.means.data(), em.means.data() + n);
      mm.pair_moments.resize(ne);
      for (int k = 0; k < ne; ++k)
        mm.pair_moments[k] = em.pair_moments(graph.edges()[k].i, graph.edges()[k].j);
      double ll = -em.log_partition;
      for (int i = 0; i < n; ++i) ll += biases[i] * target_mean[i];
      for (int k = 0; k < ne; ++k) ll += couplings[k] * target_pair[k];
      log_likelihoods.push_back(ll);
    } else {
      mm = chain.estimate(couplings, biases, config.mc_steps_per_gradient);
    }

    double residual = 0.0;
    for (int i = 0; i < n; ++i)
      residual = std::max(residual, std::abs(target_mean[i] - mm.means[i]));
    for (int k = 0; k < ne; ++k)
      residual = std::max(residual, std::abs(target_pair[k] - mm.pair_moments[k]));
    residuals.push_back(residual);

    if (u == config.n_updates || (config.tol > 0.0 && residual <= config.tol))
      return LearnTrace{std::move(residuals), std::move(log_likelihoods),
                        std::move(model)};

    for (int i = 0; i < n; ++i)
      biases[i] += config.learning_rate * (target_mean[i] - mm.means[i]);
    for (int k = 0; k < ne; ++k)
      couplings[k] += config.learning_rate * (target_pair[k] - mm.pair_moments[k]);
    for (double b : biases)
      if (!std::isfinite(b))
        throw ConvergenceError("gradient_ascent: diverged at update " +
                                   std::to_string(u + 1),
                               residual, u + 1);
    for (double j : couplings)
      if (!std::isfinite(j))
        throw ConvergenceError("gradient_ascent: diverged at update " +
                                   std::to_string(u + 1),
                               residual, u + 1);
  }
}

}  // namespace ising
