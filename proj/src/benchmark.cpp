#include "ising/benchmark.hpp"

#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

#include "ising/errors.hpp"
#include "ising/exact.hpp"
#include "ising/rng.hpp"
#include "ising/sampler.hpp"
#include "ising/version.hpp"

namespace ising {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

std::vector<int> parse_dims(const std::string& body, std::size_t expected,
                            const std::string& spec) {
  std::vector<int> dims;
  std::size_t pos = 0;
  while (pos <= body.size()) {
    const std::size_t next = body.find('x', pos);
    const std::string tok = body.substr(pos, next == std::string::npos
                                                 ? std::string::npos
                                                 : next - pos);
    try {
      std::size_t used = 0;
      const int v = std::stoi(tok, &used);
      if (used != tok.size() || v < 1) throw std::invalid_argument(tok);
      dims.push_back(v);
    } catch (const std::exception&) {
      throw ConfigError("bad graph spec '" + spec + "'");
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  if (dims.size() != expected)
    throw ConfigError("bad graph spec '" + spec + "': expected " +
                      std::to_string(expected) + " dimensions");
  return dims;
}

}  // namespace

Graph parse_graph_spec(const std::string& spec) {
  const std::size_t colon = spec.find(':');
  if (colon == std::string::npos)
    throw ConfigError("bad graph spec '" + spec +
                      "': expected family:dims, e.g. grid2d:4x4");
  const std::string family = spec.substr(0, colon);
  const std::string body = spec.substr(colon + 1);
  if (family == "grid2d") {
    const auto d = parse_dims(body, 2, spec);
    return build_grid2d(d[0], d[1]);
  }
  if (family == "grid3d") {
    const auto d = parse_dims(body, 3, spec);
    return build_grid3d(d[0], d[1], d[2]);
  }
  if (family == "complete") {
    const auto d = parse_dims(body, 1, spec);
    return build_complete(d[0]);
  }
  throw ConfigError("bad graph spec '" + spec + "': unknown family '" + family +
                    "'");
}

std::vector<double> default_omega_grid(const std::string& graph_spec) {
  std::vector<double> grid;
  if (graph_spec.rfind("complete", 0) == 0) {
    for (int i = 1; i <= 8; ++i) grid.push_back(0.5 * i);
  } else {
    for (int i = 1; i <= 12; ++i) grid.push_back(0.1 * i);
  }
  return grid;
}

double delta_j(const InferredCouplings& estimate, const Graph& graph,
               const std::vector<double>& truth) {
  if (static_cast<int>(truth.size()) != graph.edge_count())
    throw SizeError("delta_j: truth size does not match edge count");
  const int n = graph.vertex_count();
  if (estimate.couplings.rows() != n || estimate.couplings.cols() != n)
    throw SizeError("delta_j: estimate shape does not match graph");
  double num = 0.0, den = 0.0;
  for (int k = 0; k < graph.edge_count(); ++k) {
    const Edge& e = graph.edges()[k];
    double est = estimate.couplings(e.i, e.j);
    if (!std::isfinite(est)) est = 0.0;  // flagged edges score as J = 0
    num += (est - truth[k]) * (est - truth[k]);
    den += truth[k] * truth[k];
  }
  if (den == 0.0) throw DomainError("delta_j: truth couplings identically zero");
  return std::sqrt(num / den);
}

ReconstructionReport run_sweep(const SweepConfig& config) {
  if (config.trials < 1) throw ConfigError("run_sweep: trials must be >= 1");
  if (config.jobs < 1) throw ConfigError("run_sweep: jobs must be >= 1");
  if (config.methods.empty()) throw ConfigError("run_sweep: no methods selected");
  if (!config.exact_stats) {
    if (config.sampler.sweeps < 1 || config.sampler.burn_in < 0 ||
        config.sampler.thin < 1)
      throw ConfigError("run_sweep: invalid sampler settings");
  }

  const Graph graph = parse_graph_spec(config.graph_spec);
  if (!graph.connected()) throw ConfigError("run_sweep: graph must be connected");
  if (config.exact_stats && graph.vertex_count() > kMaxExactSpins)
    throw ConfigError("run_sweep: exact statistics need |V| <= " +
                      std::to_string(kMaxExactSpins));
  const EdgeAppearance rho = uniform_edge_appearance(graph);

  ReconstructionReport report;
  report.config = config;
  report.version = kVersion;
  report.omega_grid =
      config.omega_grid.empty() ? default_omega_grid(config.graph_spec)
                                : config.omega_grid;
  for (double omega : report.omega_grid)
    if (!(omega >= 0.0)) throw ConfigError("run_sweep: omega must be >= 0");

  const int n_omega = static_cast<int>(report.omega_grid.size());
  const int n_methods = static_cast<int>(config.methods.size());
  const int cells_per_unit = n_methods;
  report.cells.resize(static_cast<std::size_t>(n_omega) * config.trials *
                      cells_per_unit);

  // One work unit = one (omega, trial) pair; its statistics are shared by
  // all methods. Results land in preassigned slots, so scheduling cannot
  // change the report.
  auto run_unit = [&](int unit) {
    const int omega_index = unit / config.trials;
    const int trial = unit % config.trials;
    const double omega = report.omega_grid[omega_index];
    const std::uint64_t cell_seed =
        derive_seed(config.rng_seed, static_cast<std::uint64_t>(omega_index),
                    static_cast<std::uint64_t>(trial));
    SweepCell* slot =
        &report.cells[static_cast<std::size_t>(unit) * cells_per_unit];
    for (int m = 0; m < n_methods; ++m) {
      slot[m].method = config.methods[m];
      slot[m].omega_index = omega_index;
      slot[m].omega = omega;
      slot[m].trial = trial;
      slot[m].delta_j = kNan;
    }

    std::vector<double> truth;
    DataStatistics stats;
    try {
      truth = generate_couplings(graph, config.regime, omega,
                                 derive_seed(cell_seed, 1));
      const std::vector<double> biases =
          generate_biases(graph, derive_seed(cell_seed, 2));
      const IsingModel model(graph, truth, biases);
      if (config.exact_stats) {
        const ExactMoments em = exact_moments(model);
        stats.means = em.means;
        stats.covariance = em.covariance;
        stats.sample_count = 0;
      } else {
        stats = statistics(gibbs_sample(model, config.sampler.sweeps,
                                        config.sampler.burn_in,
                                        config.sampler.thin,
                                        derive_seed(cell_seed, 3)));
      }
    } catch (const Error& e) {
      for (int m = 0; m < n_methods; ++m) slot[m].error = e.what();
      return;
    }

    for (int m = 0; m < n_methods; ++m) {
      try {
        InferredCouplings estimate;
        switch (config.methods[m]) {
          case InverseMethod::ip: estimate = invert_ip(stats); break;
          case InverseMethod::bethe: estimate = invert_bethe(stats); break;
          case InverseMethod::sm: estimate = invert_sm(stats); break;
          case InverseMethod::trw: estimate = invert_trw(stats, graph, rho); break;
        }
        for (const auto& [i, j] : estimate.diagnostics.failed_pairs)
          if (graph.edge_index(i, j) >= 0) ++slot[m].failed_edges;
        slot[m].delta_j = delta_j(estimate, graph, truth);
      } catch (const Error& e) {
        slot[m].error = e.what();
        slot[m].delta_j = kNan;
      }
    }
  };

  const int units = n_omega * config.trials;
  if (config.jobs == 1 || units == 1) {
    for (int u = 0; u < units; ++u) run_unit(u);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    const int workers = std::min(config.jobs, units);
    pool.reserve(workers);
    for (int t = 0; t < workers; ++t)
      pool.emplace_back([&]() {
        for (int u = next.fetch_add(1); u < units; u = next.fetch_add(1))
          run_unit(u);
      });
    for (auto& th : pool) th.join();
  }

  for (int w = 0; w < n_omega; ++w) {
    for (int m = 0; m < n_methods; ++m) {
      MethodAggregate agg;
      agg.method = config.methods[m];
      agg.omega_index = w;
      agg.omega = report.omega_grid[w];
      double sum = 0.0, sum_sq = 0.0;
      for (int t = 0; t < config.trials; ++t) {
        const SweepCell& cell =
            report.cells[(static_cast<std::size_t>(w) * config.trials + t) *
                             cells_per_unit +
                         m];
        if (cell.error.empty() && std::isfinite(cell.delta_j)) {
          sum += cell.delta_j;
          sum_sq += cell.delta_j * cell.delta_j;
          ++agg.valid_trials;
        }
      }
      if (agg.valid_trials > 0) {
        agg.mean_delta_j = sum / agg.valid_trials;
        if (agg.valid_trials > 1) {
          const double var =
              (sum_sq - sum * sum / agg.valid_trials) / (agg.valid_trials - 1);
          agg.standard_error = std::sqrt(std::max(var, 0.0) / agg.valid_trials);
        }
      } else {
        agg.mean_delta_j = kNan;
        agg.standard_error = kNan;
      }
      report.aggregates.push_back(agg);
    }
  }
  return report;
}

}  // namespace ising
