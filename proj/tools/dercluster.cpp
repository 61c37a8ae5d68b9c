// Command-line front end: synthesize datasets, inspect moments, evaluate
// aggregate bounds, solve single instances, and run the benchmark and
// scalability protocols.

#include <CLI11.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "dercluster/bounds.hpp"
#include "dercluster/core.hpp"
#include "dercluster/harness.hpp"
#include "dercluster/ingest.hpp"
#include "dercluster/json_io.hpp"
#include "dercluster/solve.hpp"
#include "dercluster/stats.hpp"
#include "dercluster/text.hpp"

using namespace dercluster;

namespace {

struct DatasetArgs {
  std::string profiles_path;
  std::vector<std::string> feature_paths;
  std::string synth_path;
  std::string date_start;
  std::string date_end;
  int hour_start = 0;
  int hour_end = 24;
};

void add_dataset_options(CLI::App* cmd, DatasetArgs& args, bool many_features) {
  cmd->add_option("--profiles", args.profiles_path, "wide profiles CSV (timestamp,<id>,...)");
  cmd->add_option("--feature", args.feature_paths,
                  many_features ? "feature CSV (timestamp,value); repeat to screen candidates"
                                : "feature CSV (timestamp,value)");
  cmd->add_option("--synth", args.synth_path,
                  "synthetic spec JSON instead of CSV inputs ({} for defaults)");
  cmd->add_option("--date-start", args.date_start, "first local date kept, YYYY-MM-DD");
  cmd->add_option("--date-end", args.date_end, "last local date kept, YYYY-MM-DD");
  cmd->add_option("--hour-start", args.hour_start, "first local hour kept (default 0)");
  cmd->add_option("--hour-end", args.hour_end, "first local hour dropped again (default 24)");
}

WindowFilter make_filter(const DatasetArgs& args) {
  WindowFilter filter;
  if (!args.date_start.empty()) filter.date_start = parse_date(args.date_start);
  if (!args.date_end.empty()) filter.date_end = parse_date(args.date_end);
  filter.hour_start = args.hour_start;
  filter.hour_end = args.hour_end;
  validate(filter);
  return filter;
}

struct Dataset {
  std::vector<DerProfile> profiles;
  std::vector<FeatureSeries> features;
};

Dataset load_dataset(const DatasetArgs& args) {
  Dataset out;
  if (!args.synth_path.empty()) {
    if (!args.profiles_path.empty() || !args.feature_paths.empty())
      throw std::invalid_argument("--synth excludes --profiles/--feature");
    const SynthResult synth = synthesize(synth_spec_from_json(load_json_file(args.synth_path)));
    out.profiles = synth.profiles;
    out.features.push_back(synth.feature);
    return out;
  }
  if (args.profiles_path.empty())
    throw std::invalid_argument("either --profiles or --synth is required");
  if (args.feature_paths.empty())
    throw std::invalid_argument("--feature is required with --profiles");
  const WindowFilter filter = make_filter(args);
  out.profiles = load_profiles(args.profiles_path, filter);
  for (const std::string& path : args.feature_paths)
    out.features.push_back(load_feature(path, filter));
  return out;
}

FeatureSeries choose_feature(const Dataset& dataset, FeatureSelection* selection_out) {
  const FeatureSelection selection = select_feature(dataset.profiles, dataset.features);
  for (const FeatureCandidateScore& score : selection.table)
    if (!score.usable)
      std::cerr << "warning: feature '" << score.name << "' skipped: " << score.note << '\n';
  if (selection_out) *selection_out = selection;
  return dataset.features[static_cast<std::size_t>(selection.chosen_index)];
}

void emit(const Json& j, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << j.dump(2) << '\n';
    return;
  }
  std::ofstream out(out_path);
  if (!out) throw std::runtime_error("cannot write '" + out_path + "'");
  out << j.dump(2) << '\n';
}

std::vector<double> parse_double_list(const std::string& text, const char* what) {
  std::vector<double> out;
  for (const std::string& cell : split_csv_line(text)) {
    try {
      out.push_back(parse_double_strict(cell));
    } catch (const std::exception&) {
      throw std::invalid_argument(std::string(what) + ": not a number: '" + cell + "'");
    }
  }
  return out;
}

int run_synth(const std::string& spec_path, std::optional<std::uint64_t> seed,
              const std::string& profiles_out, const std::string& feature_out) {
  SynthSpec spec;
  if (!spec_path.empty()) spec = synth_spec_from_json(load_json_file(spec_path));
  if (seed) spec.rng_seed = *seed;
  const SynthResult result = synthesize(spec);
  write_profiles(profiles_out, result.profiles);
  write_feature(feature_out, result.feature);
  std::cerr << "wrote " << result.profiles.size() << " profiles to " << profiles_out
            << " and feature '" << result.feature.name << "' to " << feature_out << '\n';
  return 0;
}

int run_stats(const DatasetArgs& dataset_args, const std::string& out_path) {
  const Dataset dataset = load_dataset(dataset_args);
  FeatureSelection selection;
  const FeatureSeries feature = choose_feature(dataset, &selection);
  const InstanceStats stats = estimate(align(dataset.profiles, feature));
  Json j = Json::object();
  j["feature_selection"] = to_json(selection);
  j["stats"] = to_json(stats);
  emit(j, out_path);
  return 0;
}

int run_bounds(const DatasetArgs& dataset_args, const std::string& members_text,
               const std::string& levels_text, std::optional<double> tighten_w,
               double grid_step, const std::string& out_path) {
  const Dataset dataset = load_dataset(dataset_args);
  if (dataset.features.size() != 1)
    throw std::invalid_argument("bounds expects exactly one --feature");
  const AlignedData data = align(dataset.profiles, dataset.features[0]);

  std::vector<std::string> member_ids = split_csv_line(members_text);
  std::vector<int> members;
  for (const std::string& id : member_ids) {
    const auto it = std::find(data.der_ids.begin(), data.der_ids.end(), id);
    if (it == data.der_ids.end())
      throw std::invalid_argument("unknown DER id '" + id + "'");
    members.push_back(static_cast<int>(it - data.der_ids.begin()));
  }

  BoundQuery query;
  if (tighten_w) {
    if (!levels_text.empty())
      throw std::invalid_argument("--levels and --tighten-w are mutually exclusive");
    query = tighten_quantile_sum(data, members, *tighten_w, grid_step);
  } else {
    if (levels_text.empty())
      throw std::invalid_argument("one of --levels or --tighten-w is required");
    const std::vector<double> levels = parse_double_list(levels_text, "--levels");
    if (levels.size() != members.size())
      throw std::invalid_argument("--levels must list one level per member");
    query.member_indices = members;
    query.quantile_levels =
        Eigen::Map<const Eigen::VectorXd>(levels.data(), static_cast<Eigen::Index>(levels.size()));
  }

  Json j = to_json(quantile_sum_bound(data, query));
  j["member_ids"] = member_ids;
  emit(j, out_path);
  return 0;
}

int run_cluster(const DatasetArgs& dataset_args, const std::string& model_name, int clusters,
                const std::string& weights_text, std::uint64_t seed,
                std::optional<double> time_limit, std::int64_t mc_samples,
                const std::string& out_path) {
  const Model model = model_from_string(model_name);
  const std::vector<double> weights = parse_double_list(weights_text, "--weights");
  if (weights.size() != 2) throw std::invalid_argument("--weights must be 'a,b'");

  const Dataset dataset = load_dataset(dataset_args);
  const FeatureSeries feature = choose_feature(dataset, nullptr);
  const InstanceStats stats = estimate(align(dataset.profiles, feature));

  SolverConfig config;
  config.weight_a = weights[0];
  config.weight_b = weights[1];
  config.time_limit_s = time_limit;
  config.rng_seed = seed;
  config.max_clusters = clusters;

  SolveReport report;
  switch (model) {
    case Model::proxy: report = solve_proxy(stats, clusters, config); break;
    case Model::covariance: report = solve_covariance(stats, clusters, config); break;
    case Model::brute_force: report = solve_brute_force(stats, clusters, config); break;
    case Model::monte_carlo_best:
      report = mc_best_report(stats, clusters, mc_samples, seed);
      break;
  }

  Json j = to_json(report);
  j["der_ids"] = stats.der_ids;
  j["milp_binaries_per_cluster"] = milp_binaries_per_cluster(model, stats.size());
  emit(j, out_path);
  return 0;
}

int run_benchmark_cmd(const std::string& config_path, const std::string& out_dir,
                      std::optional<std::uint64_t> seed, std::optional<int> threads) {
  BenchmarkConfig config = config_path.empty()
                               ? default_benchmark_config()
                               : benchmark_config_from_json(load_json_file(config_path));
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  const BenchmarkReport report = run_benchmark(config);
  write_benchmark_outputs(out_dir, report);
  for (const ModelSummary& s : report.summary)
    std::cerr << to_string(s.model) << ": mean_leq_pct=" << s.mean_leq_pct
              << " median_leq_pct=" << s.median_leq_pct
              << " max_solve_time_s=" << s.max_solve_time_s << " (" << s.runs_counted
              << " runs)\n";
  std::cerr << "wrote " << out_dir << "/report.json and records.csv\n";
  return 0;
}

int run_scale_cmd(const std::string& config_path, const std::string& out_dir,
                  std::optional<std::uint64_t> seed, std::optional<int> threads) {
  ScalabilityConfig config = config_path.empty()
                                 ? default_scalability_config()
                                 : scalability_config_from_json(load_json_file(config_path));
  if (seed) config.seed = *seed;
  if (threads) config.threads = *threads;
  const ScalabilityReport report = run_scalability(config);
  write_scalability_outputs(out_dir, report);
  std::cerr << "wrote " << out_dir << "/report.json and scalability.csv\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster stochastic energy resources so the worst aggregate variance stays small"};
  app.require_subcommand(1);

  auto* synth_cmd = app.add_subcommand("synth", "generate a synthetic dataset as CSV");
  std::string synth_spec_path;
  std::optional<std::uint64_t> synth_seed;
  std::string synth_profiles_out = "profiles.csv";
  std::string synth_feature_out = "feature.csv";
  synth_cmd->add_option("--spec", synth_spec_path, "spec JSON (defaults when omitted)");
  synth_cmd->add_option("--seed", synth_seed, "override the spec's rng_seed");
  synth_cmd->add_option("--out-profiles", synth_profiles_out, "profiles CSV path");
  synth_cmd->add_option("--out-feature", synth_feature_out, "feature CSV path");

  auto* stats_cmd = app.add_subcommand("stats", "estimate moments and screen features");
  DatasetArgs stats_dataset;
  std::string stats_out;
  add_dataset_options(stats_cmd, stats_dataset, true);
  stats_cmd->add_option("--out", stats_out, "write the JSON report here instead of stdout");

  auto* bounds_cmd = app.add_subcommand("bounds", "quantile-sum bound for one aggregate");
  DatasetArgs bounds_dataset;
  std::string bounds_members;
  std::string bounds_levels;
  std::optional<double> bounds_tighten_w;
  double bounds_grid_step = 0.01;
  std::string bounds_out;
  add_dataset_options(bounds_cmd, bounds_dataset, false);
  bounds_cmd->add_option("--members", bounds_members, "comma-separated DER ids")->required();
  bounds_cmd->add_option("--levels", bounds_levels, "comma-separated quantile levels, one per member");
  bounds_cmd->add_option("--tighten-w", bounds_tighten_w,
                         "pick the levels by grid descent at this aggregate level");
  bounds_cmd->add_option("--grid-step", bounds_grid_step, "grid step for --tighten-w");
  bounds_cmd->add_option("--out", bounds_out, "write the JSON result here instead of stdout");

  auto* cluster_cmd = app.add_subcommand("cluster", "solve one clustering instance");
  DatasetArgs cluster_dataset;
  std::string cluster_model = "proxy";
  int cluster_k = 0;
  std::string cluster_weights = "1,1";
  std::uint64_t cluster_seed = 1;
  std::optional<double> cluster_time_limit;
  std::int64_t cluster_mc_samples = 10000;
  std::string cluster_out;
  add_dataset_options(cluster_cmd, cluster_dataset, false);
  cluster_cmd->add_option("--model", cluster_model, "proxy|covariance|brute|mc");
  cluster_cmd->add_option("--clusters", cluster_k, "maximum number of clusters")->required();
  cluster_cmd->add_option("--weights", cluster_weights, "surrogate weights 'a,b'");
  cluster_cmd->add_option("--seed", cluster_seed, "seed for the mc model");
  cluster_cmd->add_option("--time-limit", cluster_time_limit, "seconds before returning the incumbent");
  cluster_cmd->add_option("--mc-samples", cluster_mc_samples, "samples for the mc model");
  cluster_cmd->add_option("--out", cluster_out, "write the JSON report here instead of stdout");

  auto* bench_cmd = app.add_subcommand("benchmark", "randomized multi-run model comparison");
  std::string bench_config;
  std::string bench_out;
  std::optional<std::uint64_t> bench_seed;
  std::optional<int> bench_threads;
  bench_cmd->add_option("--config", bench_config, "benchmark config JSON (defaults when omitted)");
  bench_cmd->add_option("--out", bench_out, "output directory")->required();
  bench_cmd->add_option("--seed", bench_seed, "override the config seed");
  bench_cmd->add_option("--threads", bench_threads, "override the config thread count");

  auto* scale_cmd = app.add_subcommand("scale", "solve-time sweep over instance sizes");
  std::string scale_config;
  std::string scale_out;
  std::optional<std::uint64_t> scale_seed;
  std::optional<int> scale_threads;
  scale_cmd->add_option("--config", scale_config, "sweep config JSON (defaults when omitted)");
  scale_cmd->add_option("--out", scale_out, "output directory")->required();
  scale_cmd->add_option("--seed", scale_seed, "override the config seed");
  scale_cmd->add_option("--threads", scale_threads, "override the config thread count");

  CLI11_PARSE(app, argc, argv);

  try {
    if (synth_cmd->parsed())
      return run_synth(synth_spec_path, synth_seed, synth_profiles_out, synth_feature_out);
    if (stats_cmd->parsed()) return run_stats(stats_dataset, stats_out);
    if (bounds_cmd->parsed())
      return run_bounds(bounds_dataset, bounds_members, bounds_levels, bounds_tighten_w,
                        bounds_grid_step, bounds_out);
    if (cluster_cmd->parsed())
      return run_cluster(cluster_dataset, cluster_model, cluster_k, cluster_weights,
                         cluster_seed, cluster_time_limit, cluster_mc_samples, cluster_out);
    if (bench_cmd->parsed())
      return run_benchmark_cmd(bench_config, bench_out, bench_seed, bench_threads);
    if (scale_cmd->parsed())
      return run_scale_cmd(scale_config, scale_out, scale_seed, scale_threads);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
