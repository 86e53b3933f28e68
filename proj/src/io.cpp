#include "ising/io.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "ising/errors.hpp"
#include "ising/version.hpp"

namespace ising {

namespace {

double json_double(const Json& j, const std::string& context) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  if (!j.is_number()) throw ParseError(context + ": expected a number");
  return j.get<double>();
}

const Json& require(const Json& j, const std::string& key,
                    const std::string& context) {
  if (!j.is_object() || !j.contains(key))
    throw ParseError(context + ": missing key '" + key + "'");
  return j.at(key);
}

Eigen::MatrixXd matrix_from_json(const Json& j, const std::string& context) {
  if (!j.is_array()) throw ParseError(context + ": expected a matrix");
  const int rows = static_cast<int>(j.size());
  Eigen::MatrixXd m(rows, rows);
  for (int i = 0; i < rows; ++i) {
    if (!j[i].is_array() || static_cast<int>(j[i].size()) != rows)
      throw ParseError(context + ": matrix must be square");
    for (int k = 0; k < rows; ++k) m(i, k) = json_double(j[i][k], context);
  }
  return m;
}

Json matrix_to_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (int i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (int j = 0; j < m.cols(); ++j)
      row.push_back(std::isfinite(m(i, j)) ? Json(m(i, j)) : Json(nullptr));
    rows.push_back(std::move(row));
  }
  return rows;
}

std::string format_csv_double(double x) {
  if (!std::isfinite(x)) return "nan";
  return Json(x).dump();  // shortest round-trip representation
}

void check_keys(const Json& j, const std::set<std::string>& allowed,
                const std::string& context) {
  for (const auto& [key, value] : j.items())
    if (allowed.find(key) == allowed.end())
      throw ConfigError(context + ": unknown key '" + key + "'");
}

}  // namespace

Json model_to_json(const IsingModel& model) {
  Json j;
  j["vertices"] = model.graph().vertex_count();
  Json edges = Json::array();
  for (const Edge& e : model.graph().edges())
    edges.push_back(Json::array({e.i, e.j}));
  j["edges"] = std::move(edges);
  j["J"] = model.couplings();
  j["h"] = model.biases();
  return j;
}

IsingModel model_from_json(const Json& j) {
  const Json& jv = require(j, "vertices", "model");
  if (!jv.is_number_integer() || jv.get<int>() < 1)
    throw ParseError("model: 'vertices' must be a positive integer");
  const int n = jv.get<int>();
  const Json& je = require(j, "edges", "model");
  if (!je.is_array()) throw ParseError("model: 'edges' must be an array");
  std::vector<Edge> edges;
  edges.reserve(je.size());
  for (const Json& pair : je) {
    if (!pair.is_array() || pair.size() != 2 || !pair[0].is_number_integer() ||
        !pair[1].is_number_integer())
      throw ParseError("model: each edge must be a pair of integers");
    edges.push_back(Edge{pair[0].get<int>(), pair[1].get<int>()});
  }
  const Json& jj = require(j, "J", "model");
  const Json& jh = require(j, "h", "model");
  if (!jj.is_array() || !jh.is_array())
    throw ParseError("model: 'J' and 'h' must be arrays");
  std::vector<double> couplings, biases;
  for (const Json& v : jj) couplings.push_back(json_double(v, "model J"));
  for (const Json& v : jh) biases.push_back(json_double(v, "model h"));
  return IsingModel(Graph(n, std::move(edges)), std::move(couplings),
                    std::move(biases));
}

IsingModel read_model(const std::string& path) {
  return model_from_json(read_json_file(path));
}

Json statistics_to_json(const DataStatistics& stats) {
  Json j;
  j["means"] = std::vector<double>(stats.means.data(),
                                   stats.means.data() + stats.means.size());
  j["covariance"] = matrix_to_json(stats.covariance);
  j["D"] = stats.sample_count;
  return j;
}

DataStatistics statistics_from_json(const Json& j) {
  DataStatistics stats;
  const Json& jm = require(j, "means", "statistics");
  if (!jm.is_array()) throw ParseError("statistics: 'means' must be an array");
  stats.means.resize(static_cast<int>(jm.size()));
  for (int i = 0; i < stats.means.size(); ++i)
    stats.means[i] = json_double(jm[i], "statistics means");
  stats.covariance =
      matrix_from_json(require(j, "covariance", "statistics"), "statistics");
  if (stats.covariance.rows() != stats.means.size())
    throw ParseError("statistics: covariance shape does not match means");
  const Json& jd = require(j, "D", "statistics");
  if (!jd.is_number_integer() || jd.get<long>() < 0)
    throw ParseError("statistics: 'D' must be a nonnegative integer");
  stats.sample_count = jd.get<long>();
  return stats;
}

DataStatistics read_statistics(const std::string& path) {
  return statistics_from_json(read_json_file(path));
}

Json couplings_to_json(const InferredCouplings& inferred) {
  Json j;
  j["method"] = method_name(inferred.method);
  j["couplings"] = matrix_to_json(inferred.couplings);
  Json failed = Json::array();
  for (const auto& [a, b] : inferred.diagnostics.failed_pairs)
    failed.push_back(Json::array({a, b}));
  j["diagnostics"] = Json{{"failed_pairs", std::move(failed)},
                          {"condition_estimate",
                           inferred.diagnostics.condition_estimate},
                          {"warnings", inferred.diagnostics.warnings}};
  return j;
}

InferredCouplings couplings_from_json(const Json& j) {
  InferredCouplings out;
  out.method = method_from_name(
      require(j, "method", "couplings").get<std::string>());
  out.couplings = matrix_from_json(require(j, "couplings", "couplings"),
                                   "couplings");
  const Json& jd = require(j, "diagnostics", "couplings");
  for (const Json& pair : require(jd, "failed_pairs", "diagnostics"))
    out.diagnostics.failed_pairs.emplace_back(pair[0].get<int>(),
                                              pair[1].get<int>());
  out.diagnostics.condition_estimate =
      json_double(require(jd, "condition_estimate", "diagnostics"),
                  "diagnostics");
  for (const Json& w : require(jd, "warnings", "diagnostics"))
    out.diagnostics.warnings.push_back(w.get<std::string>());
  return out;
}

EdgeAppearance rho_from_json(const Json& j, const Graph& graph) {
  const Json& jr = require(j, "rho", "rho");
  if (!jr.is_array() || static_cast<int>(jr.size()) != graph.edge_count())
    throw ParseError("rho: expected one value per graph edge");
  EdgeAppearance rho;
  for (const Json& v : jr) rho.rho.push_back(json_double(v, "rho"));
  rho.validate(graph);
  return rho;
}

Json sweep_config_to_json(const SweepConfig& config) {
  Json j;
  j["graph"] = config.graph_spec;
  j["regime"] = config.regime == CouplingRegime::attractive ? "attractive" : "mixed";
  j["omega_grid"] = config.omega_grid;
  j["trials"] = config.trials;
  j["exact_stats"] = config.exact_stats;
  j["sampler"] = Json{{"sweeps", config.sampler.sweeps},
                      {"burn_in", config.sampler.burn_in},
                      {"thin", config.sampler.thin}};
  Json methods = Json::array();
  for (InverseMethod m : config.methods) methods.push_back(method_name(m));
  j["methods"] = std::move(methods);
  j["seed"] = config.rng_seed;
  j["jobs"] = config.jobs;
  return j;
}

SweepConfig sweep_config_from_json(const Json& j) {
  if (!j.is_object()) throw ConfigError("sweep config must be a JSON object");
  check_keys(j,
             {"graph", "regime", "omega_grid", "trials", "exact_stats",
              "sampler", "methods", "seed", "jobs"},
             "sweep config");
  SweepConfig config;
  if (j.contains("graph")) config.graph_spec = j.at("graph").get<std::string>();
  if (j.contains("regime")) {
    const std::string r = j.at("regime").get<std::string>();
    if (r == "attractive") config.regime = CouplingRegime::attractive;
    else if (r == "mixed") config.regime = CouplingRegime::mixed;
    else throw ConfigError("sweep config: unknown regime '" + r + "'");
  }
  if (j.contains("omega_grid"))
    config.omega_grid = j.at("omega_grid").get<std::vector<double>>();
  if (j.contains("trials")) config.trials = j.at("trials").get<int>();
  if (j.contains("exact_stats"))
    config.exact_stats = j.at("exact_stats").get<bool>();
  if (j.contains("sampler")) {
    const Json& s = j.at("sampler");
    check_keys(s, {"sweeps", "burn_in", "thin"}, "sweep config sampler");
    if (s.contains("sweeps")) config.sampler.sweeps = s.at("sweeps").get<long>();
    if (s.contains("burn_in"))
      config.sampler.burn_in = s.at("burn_in").get<long>();
    if (s.contains("thin")) config.sampler.thin = s.at("thin").get<int>();
  }
  if (j.contains("methods")) {
    config.methods.clear();
    for (const Json& m : j.at("methods"))
      config.methods.push_back(method_from_name(m.get<std::string>()));
  }
  if (j.contains("seed")) config.rng_seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("jobs")) config.jobs = j.at("jobs").get<int>();
  return config;
}

Json report_to_json(const ReconstructionReport& report) {
  Json j;
  j["config"] = sweep_config_to_json(report.config);
  j["version"] = report.version;
  j["omega_grid"] = report.omega_grid;
  Json aggregates = Json::array();
  for (const MethodAggregate& a : report.aggregates)
    aggregates.push_back(Json{{"method", method_name(a.method)},
                              {"omega", a.omega},
                              {"mean_delta_j", a.mean_delta_j},
                              {"standard_error", a.standard_error},
                              {"valid_trials", a.valid_trials}});
  j["aggregates"] = std::move(aggregates);
  Json cells = Json::array();
  for (const SweepCell& c : report.cells) {
    Json cell{{"method", method_name(c.method)}, {"omega", c.omega},
              {"trial", c.trial},    {"delta_j", c.delta_j},
              {"failures", c.failed_edges}};
    if (!c.error.empty()) cell["error"] = c.error;
    cells.push_back(std::move(cell));
  }
  j["cells"] = std::move(cells);
  return j;
}

std::string report_to_csv(const ReconstructionReport& report) {
  std::ostringstream out;
  out << "method,omega,trial,delta_j,failures\n";
  for (const SweepCell& c : report.cells)
    out << method_name(c.method) << ',' << format_csv_double(c.omega) << ','
        << c.trial << ',' << format_csv_double(c.delta_j) << ','
        << c.failed_edges << '\n';
  return out.str();
}

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw ParseError(std::string("invalid JSON in '") + path + "': " + e.what());
  }
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open '" + path + "' for writing");
  out << content;
  if (!out) throw ConfigError("failed writing '" + path + "'");
}

}  // namespace ising
