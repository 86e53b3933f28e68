#include <chrono>
#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ising/benchmark.hpp"
#include "ising/errors.hpp"
#include "ising/exact.hpp"
#include "ising/inverse.hpp"
#include "ising/io.hpp"
#include "ising/learner.hpp"
#include "ising/model.hpp"
#include "ising/rng.hpp"
#include "ising/sampler.hpp"
#include "ising/spikes.hpp"
#include "ising/trw.hpp"
#include "ising/version.hpp"

namespace {

using ising::Json;

int log_level() {
  static const int level = [] {
    const char* env = std::getenv("ISING_LOG");
    if (!env) return 0;
    const std::string v(env);
    if (v == "debug") return 2;
    if (v == "info") return 1;
    return 0;
  }();
  return level;
}

void log_info(const std::string& msg) {
  if (log_level() >= 1) std::cerr << "[ising] " << msg << "\n";
}

void log_debug(const std::string& msg) {
  if (log_level() >= 2) std::cerr << "[ising] " << msg << "\n";
}

// Assembles the manifest every output carries (embedded in JSON outputs,
// sidecar <path>.manifest.json next to CSV/text outputs).
class ManifestBuilder {
 public:
  explicit ManifestBuilder(std::string subcommand)
      : start_(std::chrono::steady_clock::now()) {
    manifest_["subcommand"] = std::move(subcommand);
    manifest_["version"] = ising::kVersion;
    manifest_["config"] = Json::object();
    manifest_["seeds"] = Json::object();
    manifest_["inputs"] = Json::array();
    manifest_["outputs"] = Json::array();
  }

  void config(const std::string& key, Json value) {
    manifest_["config"][key] = std::move(value);
  }
  void seed(const std::string& key, std::uint64_t value) {
    manifest_["seeds"][key] = value;
  }
  void input(const std::string& path) { manifest_["inputs"].push_back(path); }
  void output(const std::string& path) { manifest_["outputs"].push_back(path); }

  Json finish() {
    const auto elapsed = std::chrono::steady_clock::now() - start_;
    manifest_["wall_time_s"] =
        std::chrono::duration<double>(elapsed).count();
    return manifest_;
  }

 private:
  Json manifest_;
  std::chrono::steady_clock::time_point start_;
};

// JSON outputs embed the manifest and go to `path` or stdout.
void emit_json(Json payload, ManifestBuilder& manifest, const std::string& path) {
  if (!path.empty()) manifest.output(path);
  payload["manifest"] = manifest.finish();
  const std::string text = payload.dump(2) + "\n";
  if (path.empty()) {
    std::cout << text;
  } else {
    ising::write_text_file(path, text);
    log_info("wrote " + path);
  }
}

void emit_sidecar_manifest(ManifestBuilder& manifest, const std::string& path) {
  ising::write_text_file(path + ".manifest.json",
                         manifest.finish().dump(2) + "\n");
}

ising::EdgeAppearance resolve_rho(const std::string& rho_arg,
                                  const ising::Graph& graph,
                                  ManifestBuilder& manifest) {
  manifest.config("rho", rho_arg);
  if (rho_arg == "uniform") return ising::uniform_edge_appearance(graph);
  manifest.input(rho_arg);
  return ising::rho_from_json(ising::read_json_file(rho_arg), graph);
}

struct GenerateArgs {
  std::string graph_spec, regime = "attractive", out;
  double omega = 0.0;
  std::uint64_t seed = 0;
};

void run_generate(const GenerateArgs& args) {
  ManifestBuilder manifest("generate");
  manifest.config("graph", args.graph_spec);
  manifest.config("regime", args.regime);
  manifest.config("omega", args.omega);
  manifest.seed("seed", args.seed);
  const ising::Graph graph = ising::parse_graph_spec(args.graph_spec);
  const ising::CouplingRegime regime =
      args.regime == "attractive" ? ising::CouplingRegime::attractive
                                  : ising::CouplingRegime::mixed;
  const std::uint64_t couplings_seed = ising::derive_seed(args.seed, 1);
  const std::uint64_t biases_seed = ising::derive_seed(args.seed, 2);
  manifest.seed("couplings_seed", couplings_seed);
  manifest.seed("biases_seed", biases_seed);
  const ising::IsingModel model(
      graph, ising::generate_couplings(graph, regime, args.omega, couplings_seed),
      ising::generate_biases(graph, biases_seed));
  emit_json(ising::model_to_json(model), manifest, args.out);
}

struct OracleArgs {
  std::string model_path, out;
};

void run_oracle(const OracleArgs& args) {
  ManifestBuilder manifest("oracle");
  manifest.input(args.model_path);
  const ising::IsingModel model = ising::read_model(args.model_path);
  const ising::ExactMoments moments = ising::exact_moments(model);
  ising::DataStatistics stats;
  stats.means = moments.means;
  stats.covariance = moments.covariance;
  stats.sample_count = 0;
  // The output doubles as a statistics file: it carries means/covariance/D.
  Json payload = ising::statistics_to_json(stats);
  payload["log_partition"] = moments.log_partition;
  Json pair = Json::array();
  for (int i = 0; i < moments.pair_moments.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < moments.pair_moments.cols(); ++j)
      row.push_back(moments.pair_moments(i, j));
    pair.push_back(std::move(row));
  }
  payload["pair_moments"] = std::move(pair);
  emit_json(std::move(payload), manifest, args.out);
}

struct SampleArgs {
  std::string model_path, out, dump_samples;
  long sweeps = 100000, burn_in = 1000;
  int thin = 1;
  std::uint64_t seed = 0;
};

void run_sample(const SampleArgs& args) {
  ManifestBuilder manifest("sample");
  manifest.input(args.model_path);
  manifest.config("sweeps", args.sweeps);
  manifest.config("burn_in", args.burn_in);
  manifest.config("thin", args.thin);
  manifest.seed("seed", args.seed);
  const ising::IsingModel model = ising::read_model(args.model_path);
  const ising::SampleSet samples =
      ising::gibbs_sample(model, args.sweeps, args.burn_in, args.thin, args.seed);
  if (!args.dump_samples.empty()) {
    std::ostringstream rows;
    for (const auto& config : samples.configurations) {
      for (std::size_t i = 0; i < config.size(); ++i)
        rows << (i ? "," : "") << int(config[i]);
      rows << '\n';
    }
    ising::write_text_file(args.dump_samples, rows.str());
    manifest.output(args.dump_samples);
    log_info("wrote " + args.dump_samples);
  }
  Json payload = ising::statistics_to_json(ising::statistics(samples));
  if (!args.dump_samples.empty())
    emit_sidecar_manifest(manifest, args.dump_samples);
  emit_json(std::move(payload), manifest, args.out);
}

struct TrwBoundArgs {
  std::string model_path, rho = "uniform", out;
  double tol = 1e-10;
};

void run_trw_bound(const TrwBoundArgs& args) {
  ManifestBuilder manifest("trw-bound");
  manifest.input(args.model_path);
  manifest.config("tol", args.tol);
  const ising::IsingModel model = ising::read_model(args.model_path);
  const ising::EdgeAppearance rho =
      resolve_rho(args.rho, model.graph(), manifest);
  const ising::Pseudomarginals q =
      ising::stationary_pseudomarginals(model, rho, args.tol);
  const ising::FreeEnergyBreakdown f = ising::trw_free_energy(q, model, rho);
  Json payload;
  payload["log_partition_bound"] = -f.total;
  payload["free_energy"] = Json{{"energy", f.energy},
                                {"entropy", f.entropy},
                                {"total", f.total}};
  payload["pseudomarginals"] = Json{{"means", q.means},
                                    {"edge_covariances", q.edge_covariances}};
  if (model.graph().vertex_count() <= ising::kMaxExactSpins) {
    const double exact = ising::log_partition(model);
    payload["log_partition_exact"] = exact;
    payload["gap"] = -f.total - exact;
  } else {
    payload["log_partition_exact"] = nullptr;
    payload["gap"] = nullptr;
  }
  emit_json(std::move(payload), manifest, args.out);
}

struct InvertArgs {
  std::string stats_path, method = "all", model_path, rho = "uniform", out;
};

void run_invert(const InvertArgs& args) {
  ManifestBuilder manifest("invert");
  manifest.input(args.stats_path);
  manifest.config("method", args.method);
  const ising::DataStatistics stats = ising::read_statistics(args.stats_path);

  // Graph context: the model's graph when given, otherwise all pairs.
  ising::Graph graph = [&] {
    if (!args.model_path.empty()) {
      manifest.input(args.model_path);
      manifest.config("graph_source", "model");
      return ising::read_model(args.model_path).graph();
    }
    manifest.config("graph_source", "complete");
    return ising::build_complete(static_cast<int>(stats.means.size()));
  }();
  const ising::EdgeAppearance rho = resolve_rho(args.rho, graph, manifest);

  Json payload;
  if (args.method == "all") {
    const auto all = ising::invert_all(stats, graph, rho);
    Json methods = Json::object();
    for (const auto& [method, inferred] : all)
      methods[ising::method_name(method)] = ising::couplings_to_json(inferred);
    payload["methods"] = std::move(methods);
  } else {
    const ising::InverseMethod method = ising::method_from_name(args.method);
    ising::InferredCouplings inferred;
    switch (method) {
      case ising::InverseMethod::ip: inferred = ising::invert_ip(stats); break;
      case ising::InverseMethod::bethe:
        inferred = ising::invert_bethe(stats);
        break;
      case ising::InverseMethod::sm: inferred = ising::invert_sm(stats); break;
      case ising::InverseMethod::trw:
        inferred = ising::invert_trw(stats, graph, rho);
        break;
    }
    payload = ising::couplings_to_json(inferred);
  }
  emit_json(std::move(payload), manifest, args.out);
}

struct LearnArgs {
  std::string stats_path, graph_spec, model_path, estimator = "exact", out,
              trace_path;
  double alpha = 0.1, tol = 0.0;
  int updates = 10000, mc_steps = 100;
  std::uint64_t seed = 0;
  bool seed_given = false;
};

void run_learn(const LearnArgs& args) {
  ManifestBuilder manifest("learn");
  manifest.input(args.stats_path);
  manifest.config("estimator", args.estimator);
  manifest.config("alpha", args.alpha);
  manifest.config("updates", args.updates);
  manifest.config("tol", args.tol);
  if (args.graph_spec.empty() == args.model_path.empty())
    throw ising::ConfigError("learn: give exactly one of --graph / --model");
  const ising::DataStatistics stats = ising::read_statistics(args.stats_path);
  const ising::Graph graph = [&] {
    if (!args.model_path.empty()) {
      manifest.input(args.model_path);
      return ising::read_model(args.model_path).graph();
    }
    manifest.config("graph", args.graph_spec);
    return ising::parse_graph_spec(args.graph_spec);
  }();

  ising::LearnConfig config;
  config.learning_rate = args.alpha;
  config.n_updates = args.updates;
  config.mc_steps_per_gradient = args.mc_steps;
  config.tol = args.tol;
  config.rng_seed = args.seed;
  if (args.estimator == "exact") {
    config.estimator = ising::MomentEstimator::exact;
  } else if (args.estimator == "mcmc") {
    config.estimator = ising::MomentEstimator::mcmc;
    if (!args.seed_given)
      throw ising::ConfigError("learn: --seed is required with --estimator mcmc");
    manifest.config("mc_steps", args.mc_steps);
    manifest.seed("seed", args.seed);
  } else {
    throw ising::ConfigError("learn: unknown estimator '" + args.estimator + "'");
  }

  const ising::LearnTrace trace = ising::gradient_ascent(stats, graph, config);
  if (!args.trace_path.empty()) {
    std::ostringstream csv;
    csv << "update,residual" << (trace.log_likelihoods.empty() ? "" : ",log_likelihood")
        << '\n';
    for (std::size_t i = 0; i < trace.residuals.size(); ++i) {
      csv << i << ',' << Json(trace.residuals[i]).dump();
      if (!trace.log_likelihoods.empty())
        csv << ',' << Json(trace.log_likelihoods[i]).dump();
      csv << '\n';
    }
    ising::write_text_file(args.trace_path, csv.str());
    manifest.output(args.trace_path);
    emit_sidecar_manifest(manifest, args.trace_path);
    log_info("wrote " + args.trace_path);
  }
  Json payload;
  payload["model"] = ising::model_to_json(trace.model);
  payload["final_residual"] = trace.residuals.back();
  payload["updates_run"] = trace.residuals.size() - 1;
  emit_json(std::move(payload), manifest, args.out);
}

struct BenchArgs {
  std::string config_path, out_csv, out_json;
  int jobs = 0;  // 0 = take from config
};

void run_bench(const BenchArgs& args) {
  ManifestBuilder manifest("bench");
  manifest.input(args.config_path);
  ising::SweepConfig config =
      ising::sweep_config_from_json(ising::read_json_file(args.config_path));
  if (args.jobs > 0) config.jobs = args.jobs;
  manifest.config("sweep", ising::sweep_config_to_json(config));
  manifest.seed("seed", config.rng_seed);
  log_info("running sweep: " + config.graph_spec + ", " +
           std::to_string(config.trials) + " trials, jobs=" +
           std::to_string(config.jobs));
  const ising::ReconstructionReport report = ising::run_sweep(config);
  if (!args.out_csv.empty()) {
    ising::write_text_file(args.out_csv, ising::report_to_csv(report));
    manifest.output(args.out_csv);
    emit_sidecar_manifest(manifest, args.out_csv);
    log_info("wrote " + args.out_csv);
  }
  emit_json(ising::report_to_json(report), manifest, args.out_json);
}

struct SpikesArgs {
  std::string input, out;
  double tau = 0.001;
};

void run_spikes(const SpikesArgs& args) {
  ManifestBuilder manifest("spikes");
  manifest.input(args.input);
  manifest.config("tau", args.tau);
  const ising::SpikeTrains trains = ising::parse_spike_file(args.input);
  const ising::SpinSeries series = ising::bin_spikes(trains, args.tau);
  log_debug("binned " + std::to_string(trains.neuron_count) + " neurons into " +
            std::to_string(series.bins.size()) + " bins");
  if (series.bins.empty())
    throw ising::DomainError("spikes: recording shorter than one bin");
  Json payload = ising::statistics_to_json(ising::spike_statistics(series));
  payload["neurons"] = series.neuron_count;
  payload["bins"] = series.bins.size();
  emit_json(std::move(payload), manifest, args.out);
}

std::string error_type(const ising::Error& e) {
  if (dynamic_cast<const ising::SizeError*>(&e)) return "size_error";
  if (dynamic_cast<const ising::DomainError*>(&e)) return "domain_error";
  if (dynamic_cast<const ising::ConvergenceError*>(&e)) return "convergence_error";
  if (dynamic_cast<const ising::LinAlgError*>(&e)) return "linalg_error";
  if (dynamic_cast<const ising::ParseError*>(&e)) return "parse_error";
  if (dynamic_cast<const ising::ConfigError*>(&e)) return "config_error";
  return "error";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Analytic inverse Ising toolkit"};
  app.require_subcommand(1);

  GenerateArgs generate_args;
  auto* generate = app.add_subcommand("generate", "Draw a random model");
  generate->add_option("--graph", generate_args.graph_spec,
                       "grid2d:WxH | grid3d:XxYxZ | complete:N")
      ->required();
  generate->add_option("--regime", generate_args.regime, "attractive | mixed")
      ->check(CLI::IsMember({"attractive", "mixed"}));
  generate->add_option("--omega", generate_args.omega, "coupling scale")
      ->required();
  generate->add_option("--seed", generate_args.seed, "RNG seed")->required();
  generate->add_option("--out", generate_args.out, "output path (default stdout)");

  OracleArgs oracle_args;
  auto* oracle = app.add_subcommand("oracle", "Exact moments by enumeration");
  oracle->add_option("--model", oracle_args.model_path, "model JSON")->required();
  oracle->add_option("--out", oracle_args.out, "output path (default stdout)");

  SampleArgs sample_args;
  auto* sample = app.add_subcommand("sample", "Gibbs-sample statistics");
  sample->add_option("--model", sample_args.model_path, "model JSON")->required();
  sample->add_option("--sweeps", sample_args.sweeps, "recorded sweeps");
  sample->add_option("--burn-in", sample_args.burn_in, "discarded sweeps");
  sample->add_option("--thin", sample_args.thin, "record every thin-th sweep");
  sample->add_option("--seed", sample_args.seed, "RNG seed")->required();
  sample->add_option("--dump-samples", sample_args.dump_samples,
                     "also write raw configurations CSV");
  sample->add_option("--out", sample_args.out, "output path (default stdout)");

  TrwBoundArgs trw_args;
  auto* trw_bound = app.add_subcommand("trw-bound", "Reweighted free-energy bound");
  trw_bound->add_option("--model", trw_args.model_path, "model JSON")->required();
  trw_bound->add_option("--rho", trw_args.rho, "uniform | rho JSON path");
  trw_bound->add_option("--tol", trw_args.tol, "solver tolerance");
  trw_bound->add_option("--out", trw_args.out, "output path (default stdout)");

  InvertArgs invert_args;
  auto* invert = app.add_subcommand("invert", "Analytic coupling reconstruction");
  invert->add_option("--stats", invert_args.stats_path, "statistics JSON")
      ->required();
  invert->add_option("--method", invert_args.method, "ip|bethe|sm|trw|all")
      ->check(CLI::IsMember({"ip", "bethe", "sm", "trw", "all"}));
  invert->add_option("--model", invert_args.model_path,
                     "model JSON supplying the graph (default: all pairs)");
  invert->add_option("--rho", invert_args.rho, "uniform | rho JSON path");
  invert->add_option("--out", invert_args.out, "output path (default stdout)");

  LearnArgs learn_args;
  auto* learn = app.add_subcommand("learn", "Gradient-ascent learning");
  learn->add_option("--stats", learn_args.stats_path, "statistics JSON")
      ->required();
  learn->add_option("--graph", learn_args.graph_spec, "graph spec");
  learn->add_option("--model", learn_args.model_path,
                    "model JSON supplying the graph");
  learn->add_option("--estimator", learn_args.estimator, "exact | mcmc")
      ->check(CLI::IsMember({"exact", "mcmc"}));
  learn->add_option("--alpha", learn_args.alpha, "learning rate");
  learn->add_option("--updates", learn_args.updates, "gradient updates");
  learn->add_option("--mc-steps", learn_args.mc_steps,
                    "chain sweeps per gradient (mcmc)");
  auto* learn_seed = learn->add_option("--seed", learn_args.seed, "RNG seed (mcmc)");
  learn->add_option("--tol", learn_args.tol, "early-stop residual (0 = off)");
  learn->add_option("--trace", learn_args.trace_path, "per-update trace CSV");
  learn->add_option("--out", learn_args.out, "output path (default stdout)");

  BenchArgs bench_args;
  auto* bench = app.add_subcommand("bench", "Reconstruction sweep");
  bench->add_option("--config", bench_args.config_path, "sweep config JSON")
      ->required();
  bench->add_option("--out-csv", bench_args.out_csv, "cell table CSV path");
  bench->add_option("--out-json", bench_args.out_json,
                    "summary JSON path (default stdout)");
  bench->add_option("--jobs", bench_args.jobs, "parallel workers");

  SpikesArgs spikes_args;
  auto* spikes = app.add_subcommand("spikes", "Spike file to statistics");
  spikes->add_option("--input", spikes_args.input, "spike text file")->required();
  spikes->add_option("--tau", spikes_args.tau, "bin width in seconds");
  spikes->add_option("--out", spikes_args.out, "output path (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  learn_args.seed_given = learn_seed->count() > 0;

  try {
    if (*generate) run_generate(generate_args);
    if (*oracle) run_oracle(oracle_args);
    if (*sample) run_sample(sample_args);
    if (*trw_bound) run_trw_bound(trw_args);
    if (*invert) run_invert(invert_args);
    if (*learn) run_learn(learn_args);
    if (*bench) run_bench(bench_args);
    if (*spikes) run_spikes(spikes_args);
  } catch (const ising::Error& e) {
    Json err{{"type", error_type(e)}, {"message", e.what()}};
    if (const auto* conv = dynamic_cast<const ising::ConvergenceError*>(&e)) {
      err["residual"] = conv->residual;
      err["iterations"] = conv->iterations;
    }
    if (const auto* parse = dynamic_cast<const ising::ParseError*>(&e))
      if (parse->line >= 0) err["line"] = parse->line;
    std::cerr << Json{{"error", std::move(err)}}.dump() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << Json{{"error", {{"type", "internal"}, {"message", e.what()}}}}.dump()
              << "\n";
    return 1;
  }
  return 0;
}
