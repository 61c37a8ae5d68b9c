#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dercluster/core.hpp"
#include "dercluster/ingest.hpp"

namespace dercluster {

// Where benchmark instances come from: CSV files on disk or the synthetic
// generator. Exactly one of the two must be set.
struct SourceSpec {
  std::optional<std::string> profiles_csv;
  std::optional<std::string> feature_csv;
  WindowFilter filter;
  std::optional<SynthSpec> synth;
};

struct SourceData {
  std::vector<DerProfile> profiles;
  FeatureSeries feature;
  std::vector<int> pv_indices;
  std::vector<int> load_indices;
};

SourceData load_source(const SourceSpec& source);

struct BenchmarkConfig {
  int n_pv_per_run = 8;
  int n_load_per_run = 8;
  int max_clusters = 4;
  int m_opt = 50;       // optimization runs
  std::int64_t n_mc = 10000;  // random assignments per run
  double weight_a = 1.0;
  double weight_b = 1.0;
  std::uint64_t seed = 1;
  std::vector<Model> models{Model::proxy, Model::covariance};
  std::optional<double> time_limit_s;
  int threads = 1;
  SourceSpec source;  // default: synthetic pool, 14 PV + 36 loads
};

BenchmarkConfig default_benchmark_config();

// One model on one run. strict_pct is the share of random assignments
// strictly better (lower) than the model's result; leq_pct the share the
// model matched or beat. refused marks solves the model declined (such as
// brute force beyond its size guard).
struct ModelRunRecord {
  Model model = Model::proxy;
  double model_objective = 0.0;
  double max_true_variance = 0.0;
  double strict_pct = 0.0;
  double leq_pct = 0.0;
  double solve_time_s = 0.0;
  std::int64_t nodes_explored = 0;
  bool proof_of_optimality = false;
  bool refused = false;
  std::string note;
};

struct BenchmarkRunRecord {
  int run_index = 0;
  std::uint64_t run_seed = 0;
  std::vector<std::string> der_ids;
  double mc_best_objective = 0.0;
  std::vector<ModelRunRecord> models;
};

struct ModelSummary {
  Model model = Model::proxy;
  int runs_counted = 0;
  double mean_leq_pct = 0.0;
  double median_leq_pct = 0.0;
  double frac_runs_strict_leq_half = 0.0;  // runs where strict_pct <= 0.5
  double mean_max_true_variance = 0.0;
  double mean_solve_time_s = 0.0;
  double max_solve_time_s = 0.0;
};

struct BenchmarkReport {
  BenchmarkConfig config;
  std::vector<BenchmarkRunRecord> runs;
  std::vector<ModelSummary> summary;
};

// Draws n_pv + n_load profiles per run (without replacement, stratified by
// kind, from a per-run seed), estimates moments on the run's own alignment,
// solves every requested model, and places each result within the run's
// random-assignment sample. Runs may execute on several threads; every
// random stream is derived from (seed, run), so the report content does not
// depend on the thread count.
BenchmarkReport run_benchmark(const BenchmarkConfig& config);

std::vector<ModelSummary> summarize(const std::vector<BenchmarkRunRecord>& runs);

struct ScaleCell {
  int n_pv = 0;
  int n_load = 0;
  int max_clusters = 2;
};

struct ScalabilityConfig {
  std::vector<ScaleCell> sweep;
  int repeats = 2;
  std::vector<Model> models{Model::proxy, Model::covariance, Model::brute_force};
  double weight_a = 1.0;
  double weight_b = 1.0;
  std::uint64_t seed = 1;
  std::optional<double> time_limit_s;
  std::int64_t n_mc = 10000;  // only used when monte_carlo_best is requested
  int threads = 1;
  SourceSpec source;
};

ScalabilityConfig default_scalability_config();

struct ScaleCellRecord {
  ScaleCell cell;
  Model model = Model::proxy;
  int repeats_done = 0;
  double mean_solve_time_s = 0.0;
  double max_solve_time_s = 0.0;
  double mean_objective = 0.0;
  bool refused = false;
  std::string note;
};

struct ScalabilityReport {
  ScalabilityConfig config;
  std::vector<ScaleCellRecord> records;
};

// Times each model over the sweep; models that refuse a cell size (brute
// force beyond its guard) get a refusal row instead of an error.
ScalabilityReport run_scalability(const ScalabilityConfig& config);

// Spread of the strict-percentile estimate across seeds, per sample count.
struct ConvergenceRow {
  std::int64_t n_mc = 0;
  double mean_strict_pct = 0.0;
  double std_error = 0.0;  // sample std over seeds
};

std::vector<ConvergenceRow> mc_convergence_check(const InstanceStats& stats,
                                                 int max_clusters, double reference_value,
                                                 const std::vector<std::int64_t>& sizes,
                                                 int n_seeds, std::uint64_t seed);

// report.json plus records.csv (benchmark) or scalability.csv (sweep).
void write_benchmark_outputs(const std::string& out_dir, const BenchmarkReport& report);
void write_scalability_outputs(const std::string& out_dir, const ScalabilityReport& report);

}  // namespace dercluster
