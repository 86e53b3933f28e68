#pragma once

#include <string>

#include <json.hpp>

#include "ising/benchmark.hpp"
#include "ising/inverse.hpp"
#include "ising/model.hpp"
#include "ising/sampler.hpp"

namespace ising {

using Json = nlohmann::json;

// Model files: {"vertices": N, "edges": [[i,j],...], "J": [...], "h": [...]}.
// Unknown keys (e.g. an embedded manifest) are ignored on read.
Json model_to_json(const IsingModel& model);
IsingModel model_from_json(const Json& j);
IsingModel read_model(const std::string& path);

// Statistics files: {"means": [...], "covariance": [[...]], "D": n}.
Json statistics_to_json(const DataStatistics& stats);
DataStatistics statistics_from_json(const Json& j);
DataStatistics read_statistics(const std::string& path);

// Couplings files: {"method": ..., "couplings": [[...]], "diagnostics":
// {...}}. NaN entries serialize as null and read back as NaN.
Json couplings_to_json(const InferredCouplings& inferred);
InferredCouplings couplings_from_json(const Json& j);

// Per-edge rho files: {"rho": [...]} aligned to the graph's edge order.
EdgeAppearance rho_from_json(const Json& j, const Graph& graph);

Json sweep_config_to_json(const SweepConfig& config);
SweepConfig sweep_config_from_json(const Json& j);

Json report_to_json(const ReconstructionReport& report);
// Long format: method,omega,trial,delta_j,failures. Failed cells print nan.
std::string report_to_csv(const ReconstructionReport& report);

Json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace ising
