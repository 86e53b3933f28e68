#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ising/errors.hpp"
#include "ising/exact.hpp"
#include "ising/sampler.hpp"

using namespace ising;

TEST_CASE("argument validation") {
  const IsingModel model(Graph(2, {{0, 1}}), {0.3}, {0.0, 0.0});
  CHECK_THROWS_AS(gibbs_sample(model, 0, 10, 1, 1), ConfigError);
  CHECK_THROWS_AS(gibbs_sample(model, 10, -1, 1, 1), ConfigError);
  CHECK_THROWS_AS(gibbs_sample(model, 10, 0, 0, 1), ConfigError);
  CHECK_THROWS_AS(statistics(SampleSet{}), ConfigError);
  SampleSet ragged;
  ragged.configurations = {{1, -1}, {1}};
  CHECK_THROWS_AS(statistics(ragged), SizeError);
}

TEST_CASE("sample count and spin values") {
  const IsingModel model(Graph(3, {{0, 1}, {1, 2}}), {0.4, -0.2}, {0.1, 0.0, -0.1});
  const SampleSet samples = gibbs_sample(model, 7, 3, 5, 42);
  REQUIRE(samples.count() == 7);
  for (const auto& config : samples.configurations) {
    REQUIRE(config.size() == 3);
    for (auto s : config) CHECK((s == 1 || s == -1));
  }
  CHECK(statistics(samples).sample_count == 7);
}

TEST_CASE("free spin is a fair coin") {
  const IsingModel model(Graph(1, {}), {}, {0.0});
  const DataStatistics stats = statistics(gibbs_sample(model, 10000, 100, 1, 7));
  CHECK(std::abs(stats.means[0]) < 0.05);  // 5 sigma at D = 1e4
  CHECK(stats.covariance(0, 0) == 1.0 - stats.means[0] * stats.means[0]);
}

TEST_CASE("two-spin correlation matches tanh J") {
  const IsingModel model(Graph(2, {{0, 1}}), {0.8}, {0.0, 0.0});
  const DataStatistics stats = statistics(gibbs_sample(model, 20000, 500, 1, 3));
  const double chi = stats.covariance(0, 1) + stats.means[0] * stats.means[1];
  CHECK(chi == doctest::Approx(std::tanh(0.8)).epsilon(0.05));
}

TEST_CASE("biased spin matches tanh h") {
  const IsingModel model(Graph(1, {}), {}, {0.6});
  const DataStatistics stats = statistics(gibbs_sample(model, 20000, 500, 1, 9));
  CHECK(stats.means[0] == doctest::Approx(std::tanh(0.6)).epsilon(0.05));
}

TEST_CASE("chains are deterministic per seed") {
  const IsingModel model(build_grid2d(3, 3),
                         generate_couplings(build_grid2d(3, 3),
                                            CouplingRegime::mixed, 0.7, 5),
                         generate_biases(build_grid2d(3, 3), 6));
  const SampleSet a = gibbs_sample(model, 50, 10, 2, 123);
  const SampleSet b = gibbs_sample(model, 50, 10, 2, 123);
  CHECK(a.configurations == b.configurations);
  const SampleSet c = gibbs_sample(model, 50, 10, 2, 124);
  CHECK(a.configurations != c.configurations);
}

TEST_CASE("statistics identities are exact") {
  const Graph g = build_grid2d(2, 3);
  const IsingModel model(g, generate_couplings(g, CouplingRegime::mixed, 0.9, 1),
                         generate_biases(g, 2));
  const SampleSet samples = gibbs_sample(model, 501, 50, 1, 77);
  const DataStatistics stats = statistics(samples);

  for (int i = 0; i < 6; ++i)
    CHECK(stats.covariance(i, i) == 1.0 - stats.means[i] * stats.means[i]);
  for (int i = 0; i < 6; ++i)
    for (int j = 0; j < 6; ++j)
      CHECK(stats.covariance(i, j) == stats.covariance(j, i));

  // integer accumulation: reordering the samples changes nothing
  SampleSet reversed = samples;
  std::reverse(reversed.configurations.begin(), reversed.configurations.end());
  const DataStatistics rstats = statistics(reversed);
  CHECK((rstats.means.array() == stats.means.array()).all());
  CHECK((rstats.covariance.array() == stats.covariance.array()).all());
}

TEST_CASE("long chain approaches exact moments") {
  const Graph g = build_grid2d(2, 2);
  const IsingModel model(g, {0.5, 0.5, 0.5, 0.5}, {0.05, 0.05, 0.05, 0.05});
  const ExactMoments em = exact_moments(model);
  const DataStatistics stats = statistics(gibbs_sample(model, 200000, 1000, 1, 11));
  for (int i = 0; i < 4; ++i)
    CHECK(stats.means[i] == doctest::Approx(em.means[i]).scale(1.0).epsilon(0.02));
  for (const Edge& e : g.edges())
    CHECK(stats.covariance(e.i, e.j) ==
          doctest::Approx(em.covariance(e.i, e.j)).scale(1.0).epsilon(0.02));
}
