#include "ising/sampler.hpp"

#include <cmath>
#include <cstdint>

#include "ising/errors.hpp"
#include "ising/rng.hpp"

namespace ising {

SampleSet gibbs_sample(const IsingModel& model, long sweeps, long burn_in,
                       int thin, std::uint64_t seed) {
  if (sweeps < 1) throw ConfigError("gibbs_sample: sweeps must be >= 1");
  if (burn_in < 0) throw ConfigError("gibbs_sample: burn_in must be >= 0");
  if (thin < 1) throw ConfigError("gibbs_sample: thin must be >= 1");

  const Graph& g = model.graph();
  const std::vector<double>& couplings = model.couplings();
  const std::vector<double>& biases = model.biases();
  const int n = g.vertex_count();
  Rng rng(seed);

  SpinConfiguration state(n);
  for (int i = 0; i < n; ++i)
    state[i] = rng.uniform01() < 0.5 ? std::int8_t{-1} : std::int8_t{1};

  auto sweep = [&]() {
    for (int i = 0; i < n; ++i) {
      double field = biases[i];
      for (const auto& [j, e] : g.neighbors(i)) field += couplings[e] * state[j];
      const double p_up = 1.0 / (1.0 + std::exp(-2.0 * field));
      state[i] = rng.uniform01() < p_up ? std::int8_t{1} : std::int8_t{-1};
    }
  };

  for (long t = 0; t < burn_in; ++t) sweep();

  SampleSet out;
  out.configurations.reserve(static_cast<std::size_t>(sweeps));
  for (long d = 0; d < sweeps; ++d) {
    for (int t = 0; t < thin; ++t) sweep();
    out.configurations.push_back(state);
  }
  return out;
}

DataStatistics statistics(const SampleSet& samples) {
  const long d = static_cast<long>(samples.configurations.size());
  if (d == 0) throw ConfigError("statistics: empty sample set");
  const int n = static_cast<int>(samples.configurations.front().size());
  for (const auto& c : samples.configurations)
    if (static_cast<int>(c.size()) != n)
      throw SizeError("statistics: configurations of unequal length");

  // Integer accumulation keeps the moments exact: the result cannot depend
  // on sample order and the covariance is symmetric to the bit.
  std::vector<std::int64_t> sum(n, 0);
  std::vector<std::int64_t> sum2(static_cast<std::size_t>(n) * n, 0);
  for (const auto& c : samples.configurations) {
    for (int i = 0; i < n; ++i) {
      sum[i] += c[i];
      const std::int64_t si = c[i];
      for (int j = i + 1; j < n; ++j)
        sum2[static_cast<std::size_t>(i) * n + j] += si * c[j];
    }
  }

  DataStatistics stats;
  stats.sample_count = d;
  stats.means.resize(n);
  stats.covariance.resize(n, n);
  const double inv_d = 1.0 / static_cast<double>(d);
  for (int i = 0; i < n; ++i) stats.means[i] = static_cast<double>(sum[i]) * inv_d;
  for (int i = 0; i < n; ++i) {
    stats.covariance(i, i) = 1.0 - stats.means[i] * stats.means[i];
    for (int j = i + 1; j < n; ++j) {
      const double second =
          static_cast<double>(sum2[static_cast<std::size_t>(i) * n + j]) * inv_d;
      const double c = second - stats.means[i] * stats.means[j];
      stats.covariance(i, j) = c;
      stats.covariance(j, i) = c;
    }
  }
  return stats;
}

}  // namespace ising
