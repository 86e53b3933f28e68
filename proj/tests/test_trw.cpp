#include <doctest.h>

#include <cmath>
#include <vector>

#include "ising/errors.hpp"
#include "ising/exact.hpp"
#include "ising/rng.hpp"
#include "ising/trw.hpp"

using namespace ising;

namespace {

IsingModel random_model(const Graph& graph, CouplingRegime regime, double omega,
                        std::uint64_t seed) {
  return IsingModel(graph, generate_couplings(graph, regime, omega, derive_seed(seed, 1)),
                    generate_biases(graph, derive_seed(seed, 2)));
}

// Direct transcription of the printed closed form, valid away from the
// removable singularity at m2 = m1 t.
double f_printed(double m1, double m2, double t) {
  const double disc =
      (1 - t * t) * (1 - t * t) - 4 * t * (m1 - m2 * t) * (m2 - m1 * t);
  return (1 - t * t - std::sqrt(disc)) / (2 * t * (m2 - m1 * t));
}

}  // namespace

TEST_CASE("f_aux closed-form values") {
  CHECK(f_aux(0.3, 0.5, 0.4) == doctest::Approx(0.12172896054148272).epsilon(1e-15));
  CHECK(f_aux(0.0, 0.0, 0.7) == 0.0);
  CHECK(f_aux(0.0, 0.0, -0.7) == 0.0);
  CHECK(f_aux(0.4, 0.4, 0.0) == doctest::Approx(0.4).epsilon(1e-15));
  CHECK(f_aux(-0.25, 0.9, 0.0) == doctest::Approx(-0.25).epsilon(1e-15));
}

TEST_CASE("f_aux rationalized form matches the printed form") {
  const double ms[] = {-0.8, -0.3, 0.0, 0.2, 0.6, 0.9};
  const double ts[] = {-0.9, -0.4, 0.1, 0.5, 0.8};
  for (double m1 : ms)
    for (double m2 : ms)
      for (double t : ts) {
        const double den = 2 * t * (m2 - m1 * t);
        if (std::abs(den) < 1e-8) continue;  // removable singularity
        CHECK(f_aux(m1, m2, t) == doctest::Approx(f_printed(m1, m2, t)).epsilon(1e-12));
      }
}

TEST_CASE("f_aux rejects out-of-domain arguments") {
  CHECK_THROWS_AS(f_aux(1.5, 0.0, 0.5), DomainError);
  CHECK_THROWS_AS(f_aux(0.0, -1.2, 0.5), DomainError);
  CHECK_THROWS_AS(f_aux(0.5, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(f_aux(0.5, 0.5, -1.0), DomainError);
  // On the valid box the discriminant is bounded below by (1-|t|)^4 > 0,
  // so the negative-discriminant branch is defensive only.
}

TEST_CASE("stationary edge covariance closed forms") {
  CHECK(stationary_edge_covariance(0.0, 0.0, 0.5, 1.0) ==
        doctest::Approx(std::tanh(0.5)).epsilon(1e-15));
  CHECK(stationary_edge_covariance(0.0, 0.0, -0.5, 1.0) ==
        doctest::Approx(-std::tanh(0.5)).epsilon(1e-15));
  CHECK(stationary_edge_covariance(0.0, 0.0, 0.8, 0.5) ==
        doctest::Approx(std::tanh(1.6)).epsilon(1e-15));
  CHECK(stationary_edge_covariance(0.3, -0.2, 0.0, 1.0) == 0.0);
  // frozen value, certified against bisection on the stationarity condition
  CHECK(stationary_edge_covariance(0.3, -0.2, 0.7, 0.6) ==
        doctest::Approx(0.5399030575679649).epsilon(1e-13));
  // tiny-J series branch: c ~ (1-m1^2)(1-m2^2) t
  CHECK(stationary_edge_covariance(0.2, 0.1, 1e-13, 1.0) ==
        doctest::Approx((1 - 0.04) * (1 - 0.01) * 1e-13).epsilon(1e-3));
}

TEST_CASE("stationary edge covariance satisfies its defining condition") {
  const double ms[] = {-0.7, -0.2, 0.0, 0.35, 0.8};
  const double js[] = {-1.2, -0.4, 0.3, 0.9};
  const double rhos[] = {0.4, 0.75, 1.0};
  for (double mi : ms)
    for (double mj : ms)
      for (double J : js)
        for (double rho : rhos) {
          const double c = stationary_edge_covariance(mi, mj, J, rho);
          const double chi = mi * mj + c;
          double q[4];
          int idx = 0;
          for (int si = 1; si >= -1; si -= 2)
            for (int sj = 1; sj >= -1; sj -= 2)
              q[idx++] = 0.25 * (1 + mi * si + mj * sj + chi * si * sj);
          for (double qk : q) CHECK(qk > 0.0);
          // stationarity: (1/4) ln(q++ q-- / (q+- q-+)) = J / rho
          CHECK(0.25 * std::log(q[0] * q[3] / (q[1] * q[2])) ==
                doctest::Approx(J / rho).epsilon(1e-10));
        }
}

TEST_CASE("stationary edge covariance rejects bad arguments") {
  CHECK_THROWS_AS(stationary_edge_covariance(1.0, 0.0, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(stationary_edge_covariance(0.0, -1.1, 0.5, 1.0), DomainError);
  CHECK_THROWS_AS(stationary_edge_covariance(0.0, 0.0, 0.5, 0.0), ConfigError);
  CHECK_THROWS_AS(stationary_edge_covariance(0.0, 0.0, 0.5, 1.5), ConfigError);
}

TEST_CASE("single spin fixed point") {
  const IsingModel model(Graph(1, {}), {}, {0.3});
  const auto m = solve_self_consistency(model, EdgeAppearance{{}});
  REQUIRE(m.size() == 1);
  // damped iteration stops once the residual clears the default 1e-10 tol
  CHECK(std::abs(m[0] - std::tanh(0.3)) <= 1e-9);
}

TEST_CASE("zero field gives the zero fixed point") {
  const Graph g = build_grid2d(2, 2);
  const IsingModel model(g, {0.3, 0.3, 0.3, 0.3}, {0.0, 0.0, 0.0, 0.0});
  const auto m = solve_self_consistency(model, uniform_edge_appearance(g));
  for (double mi : m) CHECK(std::abs(mi) < 1e-9);
}

TEST_CASE("tree fixed point equals exact means") {
  Rng seeds(2024);
  for (int rep = 0; rep < 5; ++rep) {
    const Graph tree(8, {{0, 1}, {0, 2}, {1, 3}, {1, 4}, {2, 5}, {4, 6}, {4, 7}});
    std::vector<double> J(tree.edge_count()), h(tree.vertex_count());
    for (auto& j : J) j = seeds.uniform(-1.0, 1.0);
    for (auto& hi : h) hi = seeds.uniform(-0.4, 0.4);
    const IsingModel model(tree, J, h);
    const auto m = solve_self_consistency(model, uniform_edge_appearance(tree));
    const ExactMoments em = exact_moments(model);
    for (int i = 0; i < 8; ++i)
      CHECK(m[i] == doctest::Approx(em.means[i]).scale(1.0).epsilon(1e-8));
  }
}

TEST_CASE("solver is deterministic and honors the residual contract") {
  const Graph g = build_grid2d(3, 3);
  const IsingModel model = random_model(g, CouplingRegime::mixed, 1.0, 9);
  const EdgeAppearance rho = uniform_edge_appearance(g);
  const auto a = solve_self_consistency(model, rho, 1e-11);
  const auto b = solve_self_consistency(model, rho, 1e-11);
  CHECK(a == b);
  CHECK(self_consistency_residual(model, rho, a) <= 1e-11);

  // warm start from the solution converges immediately to the same point
  const auto c = solve_self_consistency(model, rho, a, 1e-11);
  CHECK(self_consistency_residual(model, rho, c) <= 1e-11);
}

TEST_CASE("solver argument validation") {
  const Graph g = build_grid2d(2, 2);
  const IsingModel model = random_model(g, CouplingRegime::mixed, 0.5, 1);
  const EdgeAppearance rho = uniform_edge_appearance(g);
  CHECK_THROWS_AS(solve_self_consistency(model, rho, std::vector<double>{0.0}),
                  SizeError);
  CHECK_THROWS_AS(
      solve_self_consistency(model, rho, std::vector<double>{0.0, 0.0, 1.5, 0.0}),
      DomainError);
  CHECK_THROWS_AS(solve_self_consistency(model, rho, 0.0), ConfigError);
  CHECK_THROWS_AS(solve_self_consistency(model, rho, -1e-8), ConfigError);
  CHECK_THROWS_AS(solve_self_consistency(model, rho, 1e-10, 0), ConfigError);
  CHECK_THROWS_AS(solve_self_consistency(model, EdgeAppearance{{0.5, 0.5, 0.5, 0.5}}),
                  DomainError);  // sum(rho) != |V| - 1
}

TEST_CASE("exhausted budget raises a convergence error with diagnostics") {
  const Graph g = build_complete(6);
  const IsingModel model(g, std::vector<double>(g.edge_count(), 1.5),
                         std::vector<double>(6, 0.1));
  const EdgeAppearance rho = uniform_edge_appearance(g);
  try {
    solve_self_consistency(model, rho, 1e-12, 1);
    FAIL("expected ConvergenceError");
  } catch (const ConvergenceError& e) {
    CHECK(e.residual > 1e-12);
    CHECK(e.iterations == 1);
  }
}

TEST_CASE("edge messages expose the reweighted quantities") {
  const Graph g = build_grid2d(2, 2);
  const IsingModel model = random_model(g, CouplingRegime::mixed, 0.8, 17);
  const EdgeAppearance rho = uniform_edge_appearance(g);
  const auto m = solve_self_consistency(model, rho);
  const EdgeMessages msg = edge_messages(model, rho, m);
  REQUIRE(msg.t_tilde.size() == 4);
  for (int k = 0; k < 4; ++k) {
    const Edge& e = g.edges()[k];
    const double t = std::tanh(model.couplings()[k] / rho.rho[k]);
    CHECK(msg.t_tilde[k] == doctest::Approx(t).epsilon(1e-15));
    CHECK(msg.f_forward[k] == doctest::Approx(f_aux(m[e.i], m[e.j], t)).epsilon(1e-14));
    CHECK(msg.f_backward[k] == doctest::Approx(f_aux(m[e.j], m[e.i], t)).epsilon(1e-14));
    CHECK(std::abs(msg.t_tilde[k]) < 1.0);
    CHECK(std::abs(msg.t_tilde[k] * msg.f_forward[k]) < 1.0);
    CHECK(std::abs(msg.t_tilde[k] * msg.f_backward[k]) < 1.0);
  }
}

TEST_CASE("free energy of the zero model") {
  const Graph g = build_grid2d(2, 2);
  const IsingModel zero(g, {0.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 0.0});
  const EdgeAppearance rho = uniform_edge_appearance(g);
  Pseudomarginals q;
  q.means.assign(4, 0.0);
  q.edge_covariances.assign(4, 0.0);
  const FreeEnergyBreakdown f = trw_free_energy(q, zero, rho);
  CHECK(f.energy == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(f.entropy == doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(f.total == doctest::Approx(-4.0 * std::log(2.0)).epsilon(1e-14));
  CHECK(trw_log_partition(zero, rho) ==
        doctest::Approx(4.0 * std::log(2.0)).epsilon(1e-12));
}

TEST_CASE("free energy of a single biased spin") {
  const IsingModel model(Graph(1, {}), {}, {1.0});
  Pseudomarginals q;
  q.means = {0.5};
  const FreeEnergyBreakdown f = trw_free_energy(q, model, EdgeAppearance{{}});
  const double entropy = -0.75 * std::log(0.75) - 0.25 * std::log(0.25);
  CHECK(f.energy == doctest::Approx(-0.5).epsilon(1e-15));
  CHECK(f.entropy == doctest::Approx(entropy).epsilon(1e-14));
  CHECK(f.total == f.energy - f.entropy);
}

TEST_CASE("free energy breakdown identity is bit-exact") {
  const Graph g = build_grid2d(2, 2);
  const IsingModel model = random_model(g, CouplingRegime::mixed, 0.9, 23);
  const EdgeAppearance rho = uniform_edge_appearance(g);
  const Pseudomarginals q = stationary_pseudomarginals(model, rho);
  const FreeEnergyBreakdown f = trw_free_energy(q, model, rho);
  CHECK(f.total == f.energy - f.entropy);
}

TEST_CASE("free energy rejects infeasible pseudomarginals") {
  const IsingModel pair(Graph(2, {{0, 1}}), {0.5}, {0.0, 0.0});
  const EdgeAppearance rho{{1.0}};
  Pseudomarginals q;
  q.means = {0.9, -0.9};
  q.edge_covariances = {-0.5};  // q(+,+) = (1 - 0.81 - 0.5) / 4 < 0
  CHECK_THROWS_AS(trw_free_energy(q, pair, rho), DomainError);
  Pseudomarginals wrong;
  wrong.means = {0.0};
  wrong.edge_covariances = {0.0};
  CHECK_THROWS_AS(trw_free_energy(wrong, pair, rho), SizeError);
}

TEST_CASE("stationary pseudomarginals are mutually consistent") {
  const Graph g = build_grid2d(3, 3);
  const IsingModel model = random_model(g, CouplingRegime::attractive, 0.9, 31);
  const EdgeAppearance rho = uniform_edge_appearance(g);
  const Pseudomarginals q = stationary_pseudomarginals(model, rho);
  REQUIRE(q.means.size() == 9);
  REQUIRE(q.edge_covariances.size() == 12);
  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[k];
    CHECK(q.edge_covariances[k] ==
          stationary_edge_covariance(q.means[e.i], q.means[e.j],
                                     model.couplings()[k], rho.rho[k]));
  }
}

TEST_CASE("upper bound battery") {
  struct Family {
    Graph graph;
    const char* name;
  };
  const std::vector<Family> families = {
      {build_grid2d(3, 3), "grid2d:3x3"},
      {build_complete(6), "complete:6"},
      {build_grid3d(2, 2, 2), "grid3d:2x2x2"},
      {Graph(8, {{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 5}, {5, 6}, {6, 7}, {0, 7}}),
       "cycle:8"},
      {Graph(7, {{0, 1}, {1, 2}, {1, 3}, {3, 4}, {3, 5}, {5, 6}}), "tree:7"},
  };
  int checked = 0;
  for (const auto& family : families) {
    const EdgeAppearance rho = uniform_edge_appearance(family.graph);
    for (CouplingRegime regime : {CouplingRegime::attractive, CouplingRegime::mixed})
      for (double omega : {0.5, 1.5})
        for (std::uint64_t seed : {101ULL, 202ULL}) {
          const IsingModel model = random_model(family.graph, regime, omega,
                                                derive_seed(seed, checked));
          const double bound = trw_log_partition(model, rho, 1e-9);
          const double exact = log_partition(model);
          INFO(family.name, " regime=", int(regime), " omega=", omega);
          CHECK(bound >= exact - 1e-9);
          if (family.graph.is_tree())
            CHECK(bound == doctest::Approx(exact).scale(1.0).epsilon(1e-8));
          ++checked;
        }
  }
  CHECK(checked == 40);
}

TEST_CASE("two-tree Jensen decomposition brackets the bound") {
  // 3-cycle; rho = (1/2, 1/2, 1) realized by two spanning trees T1, T2 with
  // probability 1/2 each. theta(T) carries J/rho on the tree's edges and the
  // full biases, so that the convex combination reproduces theta.
  const Graph cycle(3, {{0, 1}, {0, 2}, {1, 2}});
  const std::vector<double> J{0.7, -0.4, 0.9};
  const std::vector<double> h{0.1, -0.2, 0.15};
  const IsingModel model(cycle, J, h);
  const EdgeAppearance rho{{0.5, 0.5, 1.0}};

  const IsingModel tree1(cycle, {J[0] / 0.5, 0.0, J[2]}, h);  // edges {01, 12}
  const IsingModel tree2(cycle, {0.0, J[1] / 0.5, J[2]}, h);  // edges {02, 12}
  const double jensen = 0.5 * log_partition(tree1) + 0.5 * log_partition(tree2);

  const double bound = trw_log_partition(model, rho);
  const double exact = log_partition(model);
  CHECK(exact <= bound + 1e-9);
  CHECK(bound <= jensen + 1e-9);
}

TEST_CASE("pseudo moments and the envelope derivative") {
  const Graph g = build_grid2d(3, 3);
  const IsingModel model = random_model(g, CouplingRegime::mixed, 0.8, 47);
  const EdgeAppearance rho = uniform_edge_appearance(g);

  const TrwMoments tm = trw_pseudo_moments(model, rho, 1e-12);
  const Pseudomarginals q = stationary_pseudomarginals(model, rho, 1e-12);
  REQUIRE(tm.means.size() == 9);
  REQUIRE(tm.pair_moments.size() == 12);
  for (int k = 0; k < g.edge_count(); ++k) {
    const Edge& e = g.edges()[k];
    CHECK(tm.pair_moments[k] ==
          doctest::Approx(q.means[e.i] * q.means[e.j] + q.edge_covariances[k])
              .epsilon(1e-12));
  }

  // d Phi^TRW / d J_k equals the pseudo pair moment (envelope theorem)
  const double eps = 1e-5;
  for (int k : {0, 5, 11}) {
    std::vector<double> up = model.couplings(), down = model.couplings();
    up[k] += eps;
    down[k] -= eps;
    const double phi_up =
        trw_log_partition(IsingModel(g, up, model.biases()), rho, 1e-12);
    const double phi_down =
        trw_log_partition(IsingModel(g, down, model.biases()), rho, 1e-12);
    CHECK((phi_up - phi_down) / (2 * eps) ==
          doctest::Approx(tm.pair_moments[k]).scale(1.0).epsilon(1e-6));
  }
}

TEST_CASE("pseudo moments on a tree match enumeration") {
  const Graph tree(6, {{0, 1}, {1, 2}, {1, 3}, {3, 4}, {3, 5}});
  const IsingModel model = random_model(tree, CouplingRegime::mixed, 1.0, 59);
  const TrwMoments tm = trw_pseudo_moments(model, uniform_edge_appearance(tree));
  const ExactMoments em = exact_moments(model);
  for (int i = 0; i < 6; ++i)
    CHECK(tm.means[i] == doctest::Approx(em.means[i]).scale(1.0).epsilon(1e-7));
  for (int k = 0; k < tree.edge_count(); ++k) {
    const Edge& e = tree.edges()[k];
    CHECK(tm.pair_moments[k] ==
          doctest::Approx(em.pair_moments(e.i, e.j)).scale(1.0).epsilon(1e-7));
  }
}

TEST_CASE("disconnected graphs are rejected") {
  const Graph split(4, {{0, 1}, {2, 3}});
  const IsingModel model(split, {0.3, 0.3}, {0.0, 0.0, 0.0, 0.0});
  CHECK_THROWS_AS(trw_log_partition(model, EdgeAppearance{{1.0, 1.0}}),
                  DomainError);
}
