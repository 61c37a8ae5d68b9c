#pragma once

// JSON (de)serialization for configs and reports. Emission uses ordered maps
// so a given value always serializes to the same bytes.

#include <json.hpp>

#include "dercluster/bounds.hpp"
#include "dercluster/core.hpp"
#include "dercluster/harness.hpp"
#include "dercluster/ingest.hpp"
#include "dercluster/stats.hpp"

namespace dercluster {

using Json = nlohmann::ordered_json;

Json to_json(const WindowFilter& filter);
Json to_json(const SynthSpec& spec);
Json to_json(const SourceSpec& source);
Json to_json(const BenchmarkConfig& config);
Json to_json(const ScalabilityConfig& config);
Json to_json(const InstanceStats& stats);
Json to_json(const FeatureSelection& selection);
Json to_json(const SolveReport& report);
Json to_json(const BoundResult& result);
Json to_json(const BenchmarkReport& report);
Json to_json(const ScalabilityReport& report);
Json to_json(const std::vector<ConvergenceRow>& rows);

// Parsers reject unknown keys; absent keys keep the listed defaults.

WindowFilter window_filter_from_json(const Json& j);
SynthSpec synth_spec_from_json(const Json& j);
SourceSpec source_spec_from_json(const Json& j);

// Defaults from default_benchmark_config() / default_scalability_config().
BenchmarkConfig benchmark_config_from_json(const Json& j);
ScalabilityConfig scalability_config_from_json(const Json& j);

Json load_json_file(const std::string& path);

}  // namespace dercluster
