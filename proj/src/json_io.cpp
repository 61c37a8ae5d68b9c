#include "dercluster/json_io.hpp"

#include <fstream>
#include <initializer_list>
#include <stdexcept>
#include <string>

#include "dercluster/timestamp.hpp"

namespace dercluster {

namespace {

const char* kind_name(DerKind kind) {
  return kind == DerKind::pv_generator ? "pv_generator" : "load";
}

Json vector_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Json matrix_json(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

void require_object(const Json& j, const char* what,
                    std::initializer_list<const char*> keys) {
  if (!j.is_object())
    throw std::invalid_argument(std::string(what) + ": expected a JSON object");
  for (const auto& item : j.items()) {
    bool known = false;
    for (const char* key : keys)
      if (item.key() == key) {
        known = true;
        break;
      }
    if (!known)
      throw std::invalid_argument(std::string(what) + ": unknown key '" + item.key() + "'");
  }
}

template <typename T>
T get_or(const Json& j, const char* key, T fallback) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  return it->get<T>();
}

std::array<double, 2> range_from(const Json& j, const char* key,
                                 std::array<double, 2> fallback, const char* what) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_array() || it->size() != 2)
    throw std::invalid_argument(std::string(what) + ": '" + key + "' must be [lo, hi]");
  return {(*it)[0].get<double>(), (*it)[1].get<double>()};
}

std::vector<Model> models_from(const Json& j, const char* key, std::vector<Model> fallback,
                               const char* what) {
  const auto it = j.find(key);
  if (it == j.end() || it->is_null()) return fallback;
  if (!it->is_array())
    throw std::invalid_argument(std::string(what) + ": '" + key + "' must be an array");
  std::vector<Model> models;
  for (const Json& name : *it) models.push_back(model_from_string(name.get<std::string>()));
  return models;
}

std::optional<double> optional_double_from(const Json& j, const char* key,
                                           std::optional<double> fallback) {
  const auto it = j.find(key);
  if (it == j.end()) return fallback;
  if (it->is_null()) return std::nullopt;
  return it->get<double>();
}

Json to_json(const ModelRunRecord& row) {
  Json j = Json::object();
  j["model"] = to_string(row.model);
  j["refused"] = row.refused;
  j["note"] = row.note;
  j["model_objective"] = row.model_objective;
  j["max_true_variance"] = row.max_true_variance;
  j["strict_pct"] = row.strict_pct;
  j["leq_pct"] = row.leq_pct;
  j["solve_time_s"] = row.solve_time_s;
  j["nodes_explored"] = row.nodes_explored;
  j["proof_of_optimality"] = row.proof_of_optimality;
  return j;
}

Json to_json(const ModelSummary& s) {
  Json j = Json::object();
  j["model"] = to_string(s.model);
  j["runs_counted"] = s.runs_counted;
  j["mean_leq_pct"] = s.mean_leq_pct;
  j["median_leq_pct"] = s.median_leq_pct;
  j["frac_runs_strict_leq_half"] = s.frac_runs_strict_leq_half;
  j["mean_max_true_variance"] = s.mean_max_true_variance;
  j["mean_solve_time_s"] = s.mean_solve_time_s;
  j["max_solve_time_s"] = s.max_solve_time_s;
  return j;
}

}  // namespace

Json to_json(const WindowFilter& filter) {
  Json j = Json::object();
  j["date_start"] = filter.date_start ? Json(format_date(*filter.date_start)) : Json();
  j["date_end"] = filter.date_end ? Json(format_date(*filter.date_end)) : Json();
  j["hour_start"] = filter.hour_start;
  j["hour_end"] = filter.hour_end;
  return j;
}

Json to_json(const SynthSpec& spec) {
  Json j = Json::object();
  j["n_pv"] = spec.n_pv;
  j["n_load"] = spec.n_load;
  j["n_samples"] = spec.n_samples;
  j["pv_corr_range"] = spec.pv_corr_range;
  j["load_corr_range"] = spec.load_corr_range;
  j["pv_variance_range"] = spec.pv_variance_range;
  j["load_variance_range"] = spec.load_variance_range;
  j["rng_seed"] = spec.rng_seed;
  return j;
}

Json to_json(const SourceSpec& source) {
  Json j = Json::object();
  j["profiles_csv"] = source.profiles_csv ? Json(*source.profiles_csv) : Json();
  j["feature_csv"] = source.feature_csv ? Json(*source.feature_csv) : Json();
  j["filter"] = to_json(source.filter);
  j["synth"] = source.synth ? to_json(*source.synth) : Json();
  return j;
}

Json to_json(const BenchmarkConfig& config) {
  Json j = Json::object();
  j["n_pv_per_run"] = config.n_pv_per_run;
  j["n_load_per_run"] = config.n_load_per_run;
  j["max_clusters"] = config.max_clusters;
  j["m_opt"] = config.m_opt;
  j["n_mc"] = config.n_mc;
  j["weight_a"] = config.weight_a;
  j["weight_b"] = config.weight_b;
  j["seed"] = config.seed;
  Json models = Json::array();
  for (Model m : config.models) models.push_back(to_string(m));
  j["models"] = std::move(models);
  j["time_limit_s"] = config.time_limit_s ? Json(*config.time_limit_s) : Json();
  j["threads"] = config.threads;
  j["source"] = to_json(config.source);
  return j;
}

Json to_json(const ScalabilityConfig& config) {
  Json j = Json::object();
  Json sweep = Json::array();
  for (const ScaleCell& cell : config.sweep) {
    Json c = Json::object();
    c["n_pv"] = cell.n_pv;
    c["n_load"] = cell.n_load;
    c["max_clusters"] = cell.max_clusters;
    sweep.push_back(std::move(c));
  }
  j["sweep"] = std::move(sweep);
  j["repeats"] = config.repeats;
  Json models = Json::array();
  for (Model m : config.models) models.push_back(to_string(m));
  j["models"] = std::move(models);
  j["weight_a"] = config.weight_a;
  j["weight_b"] = config.weight_b;
  j["seed"] = config.seed;
  j["time_limit_s"] = config.time_limit_s ? Json(*config.time_limit_s) : Json();
  j["n_mc"] = config.n_mc;
  j["threads"] = config.threads;
  j["source"] = to_json(config.source);
  return j;
}

Json to_json(const InstanceStats& stats) {
  Json j = Json::object();
  j["der_ids"] = stats.der_ids;
  Json kinds = Json::array();
  for (DerKind kind : stats.kinds) kinds.push_back(kind_name(kind));
  j["kinds"] = std::move(kinds);
  j["sample_count"] = stats.sample_count;
  j["means"] = vector_json(stats.means);
  j["variances"] = vector_json(stats.variances);
  j["feature_corr"] = vector_json(stats.feature_corr);
  j["covariance"] = matrix_json(stats.covariance);
  return j;
}

Json to_json(const FeatureSelection& selection) {
  Json j = Json::object();
  j["chosen"] = selection.table[static_cast<std::size_t>(selection.chosen_index)].name;
  Json table = Json::array();
  for (const FeatureCandidateScore& score : selection.table) {
    Json row = Json::object();
    row["name"] = score.name;
    row["usable"] = score.usable;
    row["note"] = score.note;
    row["mean_abs_corr"] = score.mean_abs_corr;
    row["sample_count"] = score.sample_count;
    row["per_der_corr"] = vector_json(score.per_der_corr);
    table.push_back(std::move(row));
  }
  j["candidates"] = std::move(table);
  return j;
}

Json to_json(const SolveReport& report) {
  Json j = Json::object();
  j["model"] = to_string(report.model);
  j["assignment"] = report.assignment.cluster_of;
  j["max_clusters"] = report.assignment.num_clusters_max;
  j["clusters_used"] = report.assignment.clusters_used();
  j["max_true_variance"] = report.max_true_variance;
  j["model_objective"] = report.model_objective;
  j["per_cluster_variance"] = vector_json(report.per_cluster_variance);
  j["solve_time_s"] = report.solve_time_s;
  Json d = Json::object();
  d["nodes_explored"] = report.diagnostics.nodes_explored;
  d["nodes_pruned"] = report.diagnostics.nodes_pruned;
  d["partitions_evaluated"] = report.diagnostics.partitions_evaluated;
  d["proof_of_optimality"] = report.diagnostics.proof_of_optimality;
  Json history = Json::array();
  for (const IncumbentRecord& inc : report.diagnostics.incumbent_history) {
    Json h = Json::object();
    h["objective"] = inc.objective;
    h["at_time_s"] = inc.at_time_s;
    history.push_back(std::move(h));
  }
  d["incumbent_history"] = std::move(history);
  j["diagnostics"] = std::move(d);
  return j;
}

Json to_json(const BoundResult& result) {
  Json j = Json::object();
  Json q = Json::object();
  q["member_indices"] = result.query.member_indices;
  q["quantile_levels"] = vector_json(result.query.quantile_levels);
  j["query"] = std::move(q);
  j["w"] = result.w;
  j["quantile_sum"] = result.quantile_sum;
  j["mean_sum"] = result.mean_sum;
  j["std_lower_bound"] = result.std_lower_bound;
  j["vacuous"] = result.vacuous;
  return j;
}

Json to_json(const BenchmarkReport& report) {
  Json j = Json::object();
  j["config"] = to_json(report.config);
  Json runs = Json::array();
  for (const BenchmarkRunRecord& run : report.runs) {
    Json r = Json::object();
    r["run_index"] = run.run_index;
    r["run_seed"] = run.run_seed;
    r["der_ids"] = run.der_ids;
    r["mc_best_objective"] = run.mc_best_objective;
    Json models = Json::array();
    for (const ModelRunRecord& row : run.models) models.push_back(to_json(row));
    r["models"] = std::move(models);
    runs.push_back(std::move(r));
  }
  j["runs"] = std::move(runs);
  Json summary = Json::array();
  for (const ModelSummary& s : report.summary) summary.push_back(to_json(s));
  j["summary"] = std::move(summary);
  return j;
}

Json to_json(const ScalabilityReport& report) {
  Json j = Json::object();
  j["config"] = to_json(report.config);
  Json records = Json::array();
  for (const ScaleCellRecord& row : report.records) {
    Json r = Json::object();
    r["n_pv"] = row.cell.n_pv;
    r["n_load"] = row.cell.n_load;
    r["max_clusters"] = row.cell.max_clusters;
    r["model"] = to_string(row.model);
    r["repeats_done"] = row.repeats_done;
    r["mean_solve_time_s"] = row.mean_solve_time_s;
    r["max_solve_time_s"] = row.max_solve_time_s;
    r["mean_objective"] = row.mean_objective;
    r["refused"] = row.refused;
    r["note"] = row.note;
    records.push_back(std::move(r));
  }
  j["records"] = std::move(records);
  return j;
}

Json to_json(const std::vector<ConvergenceRow>& rows) {
  Json j = Json::array();
  for (const ConvergenceRow& row : rows) {
    Json r = Json::object();
    r["n_mc"] = row.n_mc;
    r["mean_strict_pct"] = row.mean_strict_pct;
    r["std_error"] = row.std_error;
    j.push_back(std::move(r));
  }
  return j;
}

WindowFilter window_filter_from_json(const Json& j) {
  require_object(j, "window filter", {"date_start", "date_end", "hour_start", "hour_end"});
  WindowFilter filter;
  if (const auto it = j.find("date_start"); it != j.end() && !it->is_null())
    filter.date_start = parse_date(it->get<std::string>());
  if (const auto it = j.find("date_end"); it != j.end() && !it->is_null())
    filter.date_end = parse_date(it->get<std::string>());
  filter.hour_start = get_or(j, "hour_start", filter.hour_start);
  filter.hour_end = get_or(j, "hour_end", filter.hour_end);
  validate(filter);
  return filter;
}

SynthSpec synth_spec_from_json(const Json& j) {
  require_object(j, "synth spec",
                 {"n_pv", "n_load", "n_samples", "pv_corr_range", "load_corr_range",
                  "pv_variance_range", "load_variance_range", "rng_seed"});
  SynthSpec spec;
  spec.n_pv = get_or(j, "n_pv", spec.n_pv);
  spec.n_load = get_or(j, "n_load", spec.n_load);
  spec.n_samples = get_or(j, "n_samples", spec.n_samples);
  spec.pv_corr_range = range_from(j, "pv_corr_range", spec.pv_corr_range, "synth spec");
  spec.load_corr_range = range_from(j, "load_corr_range", spec.load_corr_range, "synth spec");
  spec.pv_variance_range =
      range_from(j, "pv_variance_range", spec.pv_variance_range, "synth spec");
  spec.load_variance_range =
      range_from(j, "load_variance_range", spec.load_variance_range, "synth spec");
  spec.rng_seed = get_or(j, "rng_seed", spec.rng_seed);
  validate(spec);
  return spec;
}

SourceSpec source_spec_from_json(const Json& j) {
  require_object(j, "source", {"profiles_csv", "feature_csv", "filter", "synth"});
  SourceSpec source;
  if (const auto it = j.find("profiles_csv"); it != j.end() && !it->is_null())
    source.profiles_csv = it->get<std::string>();
  if (const auto it = j.find("feature_csv"); it != j.end() && !it->is_null())
    source.feature_csv = it->get<std::string>();
  if (const auto it = j.find("filter"); it != j.end() && !it->is_null())
    source.filter = window_filter_from_json(*it);
  if (const auto it = j.find("synth"); it != j.end() && !it->is_null())
    source.synth = synth_spec_from_json(*it);
  return source;
}

BenchmarkConfig benchmark_config_from_json(const Json& j) {
  require_object(j, "benchmark config",
                 {"n_pv_per_run", "n_load_per_run", "max_clusters", "m_opt", "n_mc",
                  "weight_a", "weight_b", "seed", "models", "time_limit_s", "threads",
                  "source"});
  BenchmarkConfig config = default_benchmark_config();
  config.n_pv_per_run = get_or(j, "n_pv_per_run", config.n_pv_per_run);
  config.n_load_per_run = get_or(j, "n_load_per_run", config.n_load_per_run);
  config.max_clusters = get_or(j, "max_clusters", config.max_clusters);
  config.m_opt = get_or(j, "m_opt", config.m_opt);
  config.n_mc = get_or(j, "n_mc", config.n_mc);
  config.weight_a = get_or(j, "weight_a", config.weight_a);
  config.weight_b = get_or(j, "weight_b", config.weight_b);
  config.seed = get_or(j, "seed", config.seed);
  config.models = models_from(j, "models", config.models, "benchmark config");
  config.time_limit_s = optional_double_from(j, "time_limit_s", config.time_limit_s);
  config.threads = get_or(j, "threads", config.threads);
  if (const auto it = j.find("source"); it != j.end() && !it->is_null())
    config.source = source_spec_from_json(*it);
  return config;
}

ScalabilityConfig scalability_config_from_json(const Json& j) {
  require_object(j, "scalability config",
                 {"sweep", "repeats", "models", "weight_a", "weight_b", "seed",
                  "time_limit_s", "n_mc", "threads", "source"});
  ScalabilityConfig config = default_scalability_config();
  if (const auto it = j.find("sweep"); it != j.end() && !it->is_null()) {
    if (!it->is_array())
      throw std::invalid_argument("scalability config: 'sweep' must be an array");
    config.sweep.clear();
    for (const Json& c : *it) {
      require_object(c, "sweep cell", {"n_pv", "n_load", "max_clusters"});
      ScaleCell cell;
      cell.n_pv = get_or(c, "n_pv", 0);
      cell.n_load = get_or(c, "n_load", 0);
      cell.max_clusters = get_or(c, "max_clusters", 1);
      config.sweep.push_back(cell);
    }
  }
  config.repeats = get_or(j, "repeats", config.repeats);
  config.models = models_from(j, "models", config.models, "scalability config");
  config.weight_a = get_or(j, "weight_a", config.weight_a);
  config.weight_b = get_or(j, "weight_b", config.weight_b);
  config.seed = get_or(j, "seed", config.seed);
  config.time_limit_s = optional_double_from(j, "time_limit_s", config.time_limit_s);
  config.n_mc = get_or(j, "n_mc", config.n_mc);
  config.threads = get_or(j, "threads", config.threads);
  if (const auto it = j.find("source"); it != j.end() && !it->is_null())
    config.source = source_spec_from_json(*it);
  return config;
}

Json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open JSON file '" + path + "'");
  try {
    return Json::parse(in);
  } catch (const std::exception& e) {
    throw std::runtime_error("cannot parse JSON file '" + path + "': " + e.what());
  }
}

}  // namespace dercluster
