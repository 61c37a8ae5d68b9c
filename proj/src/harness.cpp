#include "dercluster/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "dercluster/json_io.hpp"
#include "dercluster/rng.hpp"
#include "dercluster/solve.hpp"
#include "dercluster/stats.hpp"
#include "dercluster/text.hpp"

namespace dercluster {

namespace {

std::vector<int> draw_without_replacement(const std::vector<int>& pool, int count, Rng& rng) {
  if (count > static_cast<int>(pool.size()))
    throw std::invalid_argument("benchmark: requested more profiles than the pool holds");
  std::vector<int> shuffled = pool;
  for (int i = 0; i < count; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   rng.below(shuffled.size() - static_cast<std::size_t>(i));
    std::swap(shuffled[static_cast<std::size_t>(i)], shuffled[j]);
  }
  shuffled.resize(static_cast<std::size_t>(count));
  std::sort(shuffled.begin(), shuffled.end());
  return shuffled;
}

SolveReport dispatch_solver(Model model, const InstanceStats& stats, int max_clusters,
                            const SolverConfig& config, std::int64_t n_mc) {
  switch (model) {
    case Model::proxy: return solve_proxy(stats, max_clusters, config);
    case Model::covariance: return solve_covariance(stats, max_clusters, config);
    case Model::brute_force: return solve_brute_force(stats, max_clusters, config);
    case Model::monte_carlo_best:
      return mc_best_report(stats, max_clusters, n_mc, config.rng_seed);
  }
  throw std::invalid_argument("unknown model");
}

// Runs tasks 0..count-1 over the requested number of threads; any exception
// is rethrown on the caller's thread.
template <typename Task>
void parallel_for(int count, int threads, Task task) {
  threads = std::max(1, std::min(threads, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (int i = next.fetch_add(1); i < count; i = next.fetch_add(1)) {
      try {
        task(i);
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(threads));
  for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

double median(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  return values.size() % 2 ? values[mid] : 0.5 * (values[mid - 1] + values[mid]);
}

}  // namespace

SourceData load_source(const SourceSpec& source) {
  const bool from_files = source.profiles_csv.has_value();
  if (from_files == source.synth.has_value())
    throw std::invalid_argument(
        "source: set either profiles_csv/feature_csv or synth, not both");

  SourceData out;
  if (from_files) {
    if (!source.feature_csv)
      throw std::invalid_argument("source: profiles_csv needs feature_csv next to it");
    out.profiles = load_profiles(*source.profiles_csv, source.filter);
    out.feature = load_feature(*source.feature_csv, source.filter);
  } else {
    SynthResult synth = synthesize(*source.synth);
    out.profiles = std::move(synth.profiles);
    out.feature = std::move(synth.feature);
  }
  for (std::size_t i = 0; i < out.profiles.size(); ++i) {
    if (out.profiles[i].kind == DerKind::pv_generator)
      out.pv_indices.push_back(static_cast<int>(i));
    else
      out.load_indices.push_back(static_cast<int>(i));
  }
  return out;
}

BenchmarkConfig default_benchmark_config() {
  BenchmarkConfig config;
  SynthSpec pool;
  pool.n_pv = 14;
  pool.n_load = 36;
  config.source.synth = pool;
  return config;
}

BenchmarkReport run_benchmark(const BenchmarkConfig& config) {
  if (config.m_opt < 1) throw std::invalid_argument("benchmark: m_opt must be positive");
  if (config.n_mc < 1) throw std::invalid_argument("benchmark: n_mc must be positive");
  if (config.models.empty()) throw std::invalid_argument("benchmark: no models requested");
  if (config.max_clusters < 1)
    throw std::invalid_argument("benchmark: max_clusters must be positive");
  if (config.n_pv_per_run < 0 || config.n_load_per_run < 0 ||
      config.n_pv_per_run + config.n_load_per_run < 1)
    throw std::invalid_argument("benchmark: need at least one profile per run");

  const SourceData source = load_source(config.source);
  if (config.n_pv_per_run > static_cast<int>(source.pv_indices.size()) ||
      config.n_load_per_run > static_cast<int>(source.load_indices.size()))
    throw std::invalid_argument("benchmark: per-run counts exceed the pool per kind");

  BenchmarkReport report;
  report.config = config;
  report.runs.resize(static_cast<std::size_t>(config.m_opt));

  parallel_for(config.m_opt, config.threads, [&](int run) {
    BenchmarkRunRecord record;
    record.run_index = run;
    record.run_seed = derive_seed(config.seed, static_cast<std::uint64_t>(run));

    Rng draw_rng(derive_seed(record.run_seed, 1));
    std::vector<int> picked =
        draw_without_replacement(source.pv_indices, config.n_pv_per_run, draw_rng);
    const std::vector<int> loads =
        draw_without_replacement(source.load_indices, config.n_load_per_run, draw_rng);
    picked.insert(picked.end(), loads.begin(), loads.end());
    std::sort(picked.begin(), picked.end());

    std::vector<DerProfile> subset;
    subset.reserve(picked.size());
    for (int i : picked) subset.push_back(source.profiles[static_cast<std::size_t>(i)]);
    for (const DerProfile& p : subset) record.der_ids.push_back(p.id);

    const InstanceStats stats = estimate(align(subset, source.feature));
    const std::uint64_t mc_seed = derive_seed(record.run_seed, 2);
    const McResult mc = mc_baseline(stats, config.max_clusters, config.n_mc, mc_seed);
    record.mc_best_objective = mc.best_objective;

    for (Model model : config.models) {
      ModelRunRecord row;
      row.model = model;
      SolverConfig solver_config;
      solver_config.weight_a = config.weight_a;
      solver_config.weight_b = config.weight_b;
      solver_config.time_limit_s = config.time_limit_s;
      solver_config.rng_seed = mc_seed;
      solver_config.max_clusters = config.max_clusters;
      try {
        const SolveReport solved =
            dispatch_solver(model, stats, config.max_clusters, solver_config, config.n_mc);
        row.model_objective = solved.model_objective;
        row.max_true_variance = solved.max_true_variance;
        row.solve_time_s = solved.solve_time_s;
        row.nodes_explored = solved.diagnostics.nodes_explored;
        row.proof_of_optimality = solved.diagnostics.proof_of_optimality;
        if (!solved.diagnostics.proof_of_optimality && model != Model::monte_carlo_best)
          row.note = "time limit reached; incumbent reported";
        const Percentiles p = percentile_of(row.max_true_variance, mc.sorted_objectives);
        row.strict_pct = p.strict_pct;
        // Share of random assignments the model matched or beat.
        row.leq_pct = 1.0 - p.strict_pct;
      } catch (const std::exception& e) {
        row.refused = true;
        row.note = e.what();
      }
      record.models.push_back(std::move(row));
    }
    report.runs[static_cast<std::size_t>(run)] = std::move(record);
  });

  report.summary = summarize(report.runs);
  return report;
}

std::vector<ModelSummary> summarize(const std::vector<BenchmarkRunRecord>& runs) {
  std::vector<Model> order;
  for (const BenchmarkRunRecord& run : runs)
    for (const ModelRunRecord& row : run.models)
      if (std::find(order.begin(), order.end(), row.model) == order.end())
        order.push_back(row.model);

  std::vector<ModelSummary> out;
  for (Model model : order) {
    ModelSummary s;
    s.model = model;
    std::vector<double> leq;
    int strict_good = 0;
    for (const BenchmarkRunRecord& run : runs) {
      for (const ModelRunRecord& row : run.models) {
        if (row.model != model || row.refused) continue;
        ++s.runs_counted;
        leq.push_back(row.leq_pct);
        if (row.strict_pct <= 0.5) ++strict_good;
        s.mean_leq_pct += row.leq_pct;
        s.mean_max_true_variance += row.max_true_variance;
        s.mean_solve_time_s += row.solve_time_s;
        s.max_solve_time_s = std::max(s.max_solve_time_s, row.solve_time_s);
      }
    }
    if (s.runs_counted > 0) {
      s.mean_leq_pct /= s.runs_counted;
      s.mean_max_true_variance /= s.runs_counted;
      s.mean_solve_time_s /= s.runs_counted;
      s.frac_runs_strict_leq_half = static_cast<double>(strict_good) / s.runs_counted;
      s.median_leq_pct = median(std::move(leq));
    }
    out.push_back(s);
  }
  return out;
}

ScalabilityConfig default_scalability_config() {
  ScalabilityConfig config;
  config.sweep = {{2, 2, 2}, {3, 3, 3}, {4, 4, 4}, {5, 5, 4}, {6, 6, 4}, {8, 8, 4}};
  SynthSpec pool;
  pool.n_pv = 14;
  pool.n_load = 36;
  config.source.synth = pool;
  return config;
}

ScalabilityReport run_scalability(const ScalabilityConfig& config) {
  if (config.sweep.empty()) throw std::invalid_argument("scalability: empty sweep");
  if (config.repeats < 1) throw std::invalid_argument("scalability: repeats must be positive");
  if (config.models.empty()) throw std::invalid_argument("scalability: no models requested");

  const SourceData source = load_source(config.source);
  for (const ScaleCell& cell : config.sweep) {
    if (cell.max_clusters < 1)
      throw std::invalid_argument("scalability: max_clusters must be positive");
    if (cell.n_pv > static_cast<int>(source.pv_indices.size()) ||
        cell.n_load > static_cast<int>(source.load_indices.size()))
      throw std::invalid_argument("scalability: cell exceeds the pool per kind");
    if (cell.n_pv < 0 || cell.n_load < 0 || cell.n_pv + cell.n_load < 1)
      throw std::invalid_argument("scalability: cell needs at least one profile");
  }

  ScalabilityReport report;
  report.config = config;

  struct CellDraw {
    InstanceStats stats;
  };

  for (std::size_t cell_index = 0; cell_index < config.sweep.size(); ++cell_index) {
    const ScaleCell& cell = config.sweep[cell_index];

    std::vector<CellDraw> draws(static_cast<std::size_t>(config.repeats));
    parallel_for(config.repeats, config.threads, [&](int rep) {
      const std::uint64_t rep_seed =
          derive_seed(config.seed, cell_index * 1000003ULL + static_cast<std::uint64_t>(rep));
      Rng draw_rng(derive_seed(rep_seed, 1));
      std::vector<int> picked = draw_without_replacement(source.pv_indices, cell.n_pv, draw_rng);
      const std::vector<int> loads =
          draw_without_replacement(source.load_indices, cell.n_load, draw_rng);
      picked.insert(picked.end(), loads.begin(), loads.end());
      std::sort(picked.begin(), picked.end());
      std::vector<DerProfile> subset;
      for (int i : picked) subset.push_back(source.profiles[static_cast<std::size_t>(i)]);
      draws[static_cast<std::size_t>(rep)].stats = estimate(align(subset, source.feature));
    });

    for (Model model : config.models) {
      ScaleCellRecord row;
      row.cell = cell;
      row.model = model;
      std::vector<double> times, objectives;
      for (int rep = 0; rep < config.repeats; ++rep) {
        const InstanceStats& stats = draws[static_cast<std::size_t>(rep)].stats;
        SolverConfig solver_config;
        solver_config.weight_a = config.weight_a;
        solver_config.weight_b = config.weight_b;
        solver_config.time_limit_s = config.time_limit_s;
        solver_config.rng_seed =
            derive_seed(config.seed, cell_index * 1000003ULL + static_cast<std::uint64_t>(rep));
        solver_config.max_clusters = cell.max_clusters;
        try {
          const SolveReport solved =
              dispatch_solver(model, stats, cell.max_clusters, solver_config, config.n_mc);
          times.push_back(solved.solve_time_s);
          objectives.push_back(solved.max_true_variance);
          if (!solved.diagnostics.proof_of_optimality && model != Model::monte_carlo_best)
            row.note = "time limit reached on at least one repeat";
        } catch (const std::exception& e) {
          row.refused = true;
          row.note = e.what();
          break;
        }
      }
      row.repeats_done = static_cast<int>(times.size());
      for (double t : times) {
        row.mean_solve_time_s += t;
        row.max_solve_time_s = std::max(row.max_solve_time_s, t);
      }
      for (double o : objectives) row.mean_objective += o;
      if (!times.empty()) {
        row.mean_solve_time_s /= static_cast<double>(times.size());
        row.mean_objective /= static_cast<double>(objectives.size());
      }
      report.records.push_back(std::move(row));
    }
  }
  return report;
}

std::vector<ConvergenceRow> mc_convergence_check(const InstanceStats& stats,
                                                 int max_clusters, double reference_value,
                                                 const std::vector<std::int64_t>& sizes,
                                                 int n_seeds, std::uint64_t seed) {
  if (sizes.empty()) throw std::invalid_argument("convergence check: no sample sizes");
  if (n_seeds < 2) throw std::invalid_argument("convergence check: need at least 2 seeds");

  std::vector<ConvergenceRow> out;
  for (std::int64_t size : sizes) {
    if (size < 1) throw std::invalid_argument("convergence check: sample sizes must be positive");
    ConvergenceRow row;
    row.n_mc = size;
    Eigen::VectorXd estimates(n_seeds);
    for (int s = 0; s < n_seeds; ++s) {
      const std::uint64_t stream =
          derive_seed(derive_seed(seed, static_cast<std::uint64_t>(size)),
                      static_cast<std::uint64_t>(s));
      const McResult mc = mc_baseline(stats, max_clusters, size, stream);
      estimates[s] = percentile_of(reference_value, mc.sorted_objectives).strict_pct;
    }
    row.mean_strict_pct = estimates.mean();
    row.std_error = std::sqrt(sample_variance(estimates));
    out.push_back(row);
  }
  return out;
}

void write_benchmark_outputs(const std::string& out_dir, const BenchmarkReport& report) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    std::ofstream json(dir / "report.json");
    if (!json) throw std::runtime_error("cannot write report.json in '" + out_dir + "'");
    json << to_json(report).dump(2) << '\n';
  }
  std::ofstream csv(dir / "records.csv");
  if (!csv) throw std::runtime_error("cannot write records.csv in '" + out_dir + "'");
  csv << "run_index,run_seed,der_ids,model,model_objective,max_true_variance,"
         "strict_pct,leq_pct,solve_time_s,nodes_explored,proof_of_optimality,refused,note\n";
  for (const BenchmarkRunRecord& run : report.runs) {
    for (const ModelRunRecord& row : run.models) {
      csv << run.run_index << ',' << run.run_seed << ',' << join(run.der_ids, ";") << ','
          << to_string(row.model) << ',' << format_double(row.model_objective) << ','
          << format_double(row.max_true_variance) << ',' << format_double(row.strict_pct)
          << ',' << format_double(row.leq_pct) << ',' << format_double(row.solve_time_s)
          << ',' << row.nodes_explored << ',' << (row.proof_of_optimality ? 1 : 0) << ','
          << (row.refused ? 1 : 0) << ',' << row.note << '\n';
    }
  }
  if (!csv) throw std::runtime_error("failed writing records.csv in '" + out_dir + "'");
}

void write_scalability_outputs(const std::string& out_dir, const ScalabilityReport& report) {
  std::filesystem::create_directories(out_dir);
  const std::filesystem::path dir(out_dir);
  {
    std::ofstream json(dir / "report.json");
    if (!json) throw std::runtime_error("cannot write report.json in '" + out_dir + "'");
    json << to_json(report).dump(2) << '\n';
  }
  std::ofstream csv(dir / "scalability.csv");
  if (!csv) throw std::runtime_error("cannot write scalability.csv in '" + out_dir + "'");
  csv << "n_pv,n_load,n_ders,max_clusters,model,repeats_done,mean_solve_time_s,"
         "max_solve_time_s,mean_objective,refused,note\n";
  for (const ScaleCellRecord& row : report.records) {
    csv << row.cell.n_pv << ',' << row.cell.n_load << ',' << row.cell.n_pv + row.cell.n_load
        << ',' << row.cell.max_clusters << ',' << to_string(row.model) << ','
        << row.repeats_done << ',' << format_double(row.mean_solve_time_s) << ','
        << format_double(row.max_solve_time_s) << ',' << format_double(row.mean_objective)
        << ',' << (row.refused ? 1 : 0) << ',' << row.note << '\n';
  }
  if (!csv) throw std::runtime_error("failed writing scalability.csv in '" + out_dir + "'");
}

}  // namespace dercluster
