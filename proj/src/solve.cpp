#include "dercluster/solve.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

#include "dercluster/rng.hpp"
#include "dercluster/stats.hpp"

namespace dercluster {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

void check_solver_input(const InstanceStats& stats, int max_clusters) {
  if (stats.size() < 1) throw std::invalid_argument("solver: empty instance");
  if (max_clusters < 1) throw std::invalid_argument("solver: need at least one cluster");
  if (stats.covariance.rows() != stats.size() || stats.covariance.cols() != stats.size())
    throw std::invalid_argument("solver: covariance shape does not match instance");
}

// Depth-first search over canonical assignments: member d is placed after
// members 0..d-1, into one of the clusters already in use or the next fresh
// one. Each policy keeps incremental per-cluster state whose accumulation
// order matches the standalone evaluators exactly, so a leaf value equals
// the objective recomputed from the final assignment, bit for bit.
template <typename Policy>
class Search {
 public:
  Search(const InstanceStats& stats, int max_clusters, const SolverConfig& config,
         Policy policy)
      : stats_(stats),
        n_(stats.size()),
        k_(std::min(max_clusters, stats.size())),
        config_(config),
        policy_(std::move(policy)),
        labels_(static_cast<std::size_t>(stats.size()), -1) {}

  void run() {
    start_ = Clock::now();
    descend(0, 0);
    diagnostics_.proof_of_optimality = !timed_out_;
  }

  const std::vector<int>& best_labels() const { return best_labels_; }
  double best_objective() const { return best_objective_; }
  const SearchDiagnostics& diagnostics() const { return diagnostics_; }
  double elapsed_s() const { return seconds_since(start_); }

 private:
  void descend(int depth, int used) {
    if (timed_out_) return;
    if (depth == n_) {
      ++diagnostics_.partitions_evaluated;
      const double value = policy_.leaf_value(used);
      if (value < best_objective_) {
        best_objective_ = value;
        best_labels_ = labels_;
        diagnostics_.incumbent_history.push_back({value, seconds_since(start_)});
      }
      return;
    }
    const int choices = std::min(used + 1, k_);
    for (int c = 0; c < choices; ++c) {
      ++diagnostics_.nodes_explored;
      if ((diagnostics_.nodes_explored & 1023) == 0) check_time();
      if (timed_out_) return;
      policy_.push(depth, c);
      labels_[static_cast<std::size_t>(depth)] = c;
      bool pruned = false;
      if (Policy::has_bound && !best_labels_.empty()) {
        // Margin keeps rounding noise in the bound from ever discarding a
        // genuinely improving branch.
        const double guard = 1e-10 * (1.0 + std::abs(best_objective_));
        if (policy_.bound(depth, std::max(used, c + 1)) >= best_objective_ + guard)
          pruned = true;
      }
      if (pruned) {
        ++diagnostics_.nodes_pruned;
      } else {
        descend(depth + 1, std::max(used, c + 1));
      }
      policy_.pop(depth, c);
      labels_[static_cast<std::size_t>(depth)] = -1;
    }
  }

  void check_time() {
    if (!config_.time_limit_s || best_labels_.empty()) return;
    if (seconds_since(start_) > *config_.time_limit_s) timed_out_ = true;
  }

  const InstanceStats& stats_;
  int n_ = 0;
  int k_ = 0;
  SolverConfig config_;
  Policy policy_;
  std::vector<int> labels_;
  std::vector<int> best_labels_;
  double best_objective_ = std::numeric_limits<double>::infinity();
  SearchDiagnostics diagnostics_;
  Clock::time_point start_;
  bool timed_out_ = false;
};

// True objective: per-cluster aggregate variance, incremental form of
// cluster_variance. cross_[c][i] carries the covariance of candidate i with
// cluster c's current members, accumulated in member index order.
class VariancePolicy {
 public:
  static constexpr bool has_bound = true;  // brute force turns it off below

  VariancePolicy(const InstanceStats& stats, int k)
      : stats_(stats), n_(stats.size()), k_(std::min(k, stats.size())) {
    value_.assign(static_cast<std::size_t>(k_), 0.0);
    cross_.assign(static_cast<std::size_t>(k_),
                  std::vector<double>(static_cast<std::size_t>(n_), 0.0));
    neg_cross_ = cross_;
    saved_value_.assign(static_cast<std::size_t>(n_), 0.0);
    saved_cross_.assign(static_cast<std::size_t>(n_),
                        std::vector<double>(static_cast<std::size_t>(n_), 0.0));
    saved_neg_cross_ = saved_cross_;
  }

  void push(int der, int cluster) {
    const auto c = static_cast<std::size_t>(cluster);
    const auto d = static_cast<std::size_t>(der);
    saved_value_[d] = value_[c];
    value_[c] += stats_.variances[der] + 2.0 * cross_[c][d];
    for (int i = der + 1; i < n_; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      saved_cross_[d][ii] = cross_[c][ii];
      saved_neg_cross_[d][ii] = neg_cross_[c][ii];
      const double cov = stats_.covariance(der, i);
      cross_[c][ii] += cov;
      neg_cross_[c][ii] += std::min(0.0, 2.0 * cov);
    }
  }

  void pop(int der, int cluster) {
    const auto c = static_cast<std::size_t>(cluster);
    const auto d = static_cast<std::size_t>(der);
    value_[c] = saved_value_[d];
    for (int i = der + 1; i < n_; ++i) {
      const auto ii = static_cast<std::size_t>(i);
      cross_[c][ii] = saved_cross_[d][ii];
      neg_cross_[c][ii] = saved_neg_cross_[d][ii];
    }
  }

  double leaf_value(int used) const {
    double worst = used < k_ ? 0.0 : -std::numeric_limits<double>::infinity();
    for (int c = 0; c < used; ++c)
      worst = std::max(worst, value_[static_cast<std::size_t>(c)]);
    return worst;
  }

  // Any completion of cluster c ends no lower than its current value plus,
  // per unassigned member, that member's negative covariance coupling to
  // the current cluster; everything else a completion adds has nonnegative
  // aggregate variance.
  double bound(int depth, int used) const {
    double worst = -std::numeric_limits<double>::infinity();
    for (int c = 0; c < used; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      double slack = 0.0;
      for (int u = depth + 1; u < n_; ++u)
        slack += std::min(0.0, neg_cross_[cc][static_cast<std::size_t>(u)]);
      worst = std::max(worst, value_[cc] + slack);
    }
    return worst;
  }

 private:
  const InstanceStats& stats_;
  int n_ = 0;
  int k_ = 0;
  std::vector<double> value_;
  std::vector<std::vector<double>> cross_;
  std::vector<std::vector<double>> neg_cross_;
  std::vector<double> saved_value_;
  std::vector<std::vector<double>> saved_cross_;
  std::vector<std::vector<double>> saved_neg_cross_;
};

class ExhaustivePolicy : public VariancePolicy {
 public:
  static constexpr bool has_bound = false;
  using VariancePolicy::VariancePolicy;
};

// Surrogate objective: worst per-cluster variance sum and worst per-cluster
// |signed proxy mass|, accumulated in member index order to match
// proxy_terms exactly.
class ProxyPolicy {
 public:
  static constexpr bool has_bound = true;

  ProxyPolicy(const InstanceStats& stats, int k, double weight_a, double weight_b)
      : stats_(stats), n_(stats.size()), k_(std::min(k, stats.size())),
        weight_a_(weight_a), weight_b_(weight_b) {
    proxy_mass_.resize(n_);
    for (int i = 0; i < n_; ++i)
      proxy_mass_[i] = stats.feature_corr[i] * stats.variances[i];
    pos_suffix_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
    neg_suffix_.assign(static_cast<std::size_t>(n_) + 1, 0.0);
    for (int i = n_ - 1; i >= 0; --i) {
      const auto ii = static_cast<std::size_t>(i);
      pos_suffix_[ii] = pos_suffix_[ii + 1] + std::max(0.0, proxy_mass_[i]);
      neg_suffix_[ii] = neg_suffix_[ii + 1] + std::max(0.0, -proxy_mass_[i]);
    }
    var_sum_.assign(static_cast<std::size_t>(k_), 0.0);
    proxy_sum_.assign(static_cast<std::size_t>(k_), 0.0);
    saved_var_.assign(static_cast<std::size_t>(n_), 0.0);
    saved_proxy_.assign(static_cast<std::size_t>(n_), 0.0);
  }

  void push(int der, int cluster) {
    const auto c = static_cast<std::size_t>(cluster);
    const auto d = static_cast<std::size_t>(der);
    saved_var_[d] = var_sum_[c];
    saved_proxy_[d] = proxy_sum_[c];
    var_sum_[c] += stats_.variances[der];
    proxy_sum_[c] += proxy_mass_[der];
  }

  void pop(int der, int cluster) {
    const auto c = static_cast<std::size_t>(cluster);
    const auto d = static_cast<std::size_t>(der);
    var_sum_[c] = saved_var_[d];
    proxy_sum_[c] = saved_proxy_[d];
  }

  double leaf_value(int used) const {
    double y = 0.0, z = 0.0;
    for (int c = 0; c < used; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      y = std::max(y, var_sum_[cc]);
      z = std::max(z, std::abs(proxy_sum_[cc]));
    }
    return weight_a_ * y + weight_b_ * z;
  }

  // Variance sums only grow; a cluster's |proxy mass| can be cancelled by at
  // most the opposite-signed mass still unassigned.
  double bound(int depth, int used) const {
    double y = 0.0, z = 0.0;
    for (int c = 0; c < used; ++c) {
      const auto cc = static_cast<std::size_t>(c);
      y = std::max(y, var_sum_[cc]);
      const double s = proxy_sum_[cc];
      const double opposite = s >= 0.0 ? neg_suffix_[static_cast<std::size_t>(depth) + 1]
                                       : pos_suffix_[static_cast<std::size_t>(depth) + 1];
      z = std::max(z, std::max(0.0, std::abs(s) - opposite));
    }
    return weight_a_ * y + weight_b_ * z;
  }

 private:
  const InstanceStats& stats_;
  int n_ = 0;
  int k_ = 0;
  double weight_a_ = 1.0;
  double weight_b_ = 1.0;
  Eigen::VectorXd proxy_mass_;
  std::vector<double> pos_suffix_;
  std::vector<double> neg_suffix_;
  std::vector<double> var_sum_;
  std::vector<double> proxy_sum_;
  std::vector<double> saved_var_;
  std::vector<double> saved_proxy_;
};

template <typename Policy>
SolveReport run_search(Model model, const InstanceStats& stats, int max_clusters,
                       const SolverConfig& config, Policy policy) {
  Search<Policy> search(stats, max_clusters, config, std::move(policy));
  search.run();

  SolveReport report;
  report.model = model;
  report.assignment = canonicalize(search.best_labels(), max_clusters);
  report.per_cluster_variance = per_cluster_variances(stats, report.assignment);
  report.max_true_variance = report.per_cluster_variance.maxCoeff();
  report.model_objective = model == Model::proxy
                               ? proxy_objective(stats, report.assignment, config)
                               : report.max_true_variance;
  report.diagnostics = search.diagnostics();
  report.solve_time_s = search.elapsed_s();
  return report;
}

}  // namespace

SolveReport solve_brute_force(const InstanceStats& stats, int max_clusters,
                              const SolverConfig& config) {
  check_solver_input(stats, max_clusters);
  if (stats.size() > brute_force_max_ders)
    throw std::invalid_argument(
        "brute force refuses " + std::to_string(stats.size()) + " members (limit " +
        std::to_string(brute_force_max_ders) + "); use the covariance model instead");
  return run_search(Model::brute_force, stats, max_clusters, config,
                    ExhaustivePolicy(stats, max_clusters));
}

SolveReport solve_covariance(const InstanceStats& stats, int max_clusters,
                             const SolverConfig& config) {
  check_solver_input(stats, max_clusters);
  return run_search(Model::covariance, stats, max_clusters, config,
                    VariancePolicy(stats, max_clusters));
}

SolveReport solve_proxy(const InstanceStats& stats, int max_clusters,
                        const SolverConfig& config) {
  check_solver_input(stats, max_clusters);
  return run_search(Model::proxy, stats, max_clusters, config,
                    ProxyPolicy(stats, max_clusters, config.weight_a, config.weight_b));
}

McResult mc_baseline(const InstanceStats& stats, int max_clusters, std::int64_t n_samples,
                     std::uint64_t seed) {
  check_solver_input(stats, max_clusters);
  if (n_samples < 1) throw std::invalid_argument("mc_baseline: need at least one sample");

  const int n = stats.size();
  McResult out;
  out.sorted_objectives.resize(n_samples);
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::vector<int> best_labels;
  for (std::int64_t s = 0; s < n_samples; ++s) {
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(s)));
    for (int i = 0; i < n; ++i)
      labels[static_cast<std::size_t>(i)] =
          static_cast<int>(rng.below(static_cast<std::uint64_t>(max_clusters)));
    ClusterAssignment a;
    a.cluster_of = labels;
    a.num_clusters_max = max_clusters;
    const double objective = max_cluster_variance(stats, a);
    out.sorted_objectives[s] = objective;
    if (out.best_sample_index < 0 || objective < out.best_objective) {
      out.best_objective = objective;
      out.best_sample_index = s;
      best_labels = labels;
    }
  }
  std::sort(out.sorted_objectives.data(),
            out.sorted_objectives.data() + out.sorted_objectives.size());
  out.best_assignment = canonicalize(best_labels, max_clusters);
  return out;
}

Percentiles percentile_of(double value, const Eigen::Ref<const Eigen::VectorXd>& sorted_sample) {
  const Eigen::Index n = sorted_sample.size();
  if (n < 1) throw std::invalid_argument("percentile_of: empty sample");
  const double* begin = sorted_sample.data();
  const double* end = begin + n;
  Percentiles out;
  out.strict_pct = static_cast<double>(std::lower_bound(begin, end, value) - begin) /
                   static_cast<double>(n);
  out.leq_pct = static_cast<double>(std::upper_bound(begin, end, value) - begin) /
                static_cast<double>(n);
  return out;
}

SolveReport mc_best_report(const InstanceStats& stats, int max_clusters,
                           std::int64_t n_samples, std::uint64_t seed) {
  const auto start = Clock::now();
  const McResult mc = mc_baseline(stats, max_clusters, n_samples, seed);
  SolveReport report;
  report.model = Model::monte_carlo_best;
  report.assignment = mc.best_assignment;
  report.per_cluster_variance = per_cluster_variances(stats, report.assignment);
  report.max_true_variance = report.per_cluster_variance.maxCoeff();
  report.model_objective = report.max_true_variance;
  report.diagnostics.partitions_evaluated = n_samples;
  report.diagnostics.nodes_explored = n_samples;
  report.diagnostics.proof_of_optimality = false;
  report.solve_time_s = seconds_since(start);
  return report;
}

}  // namespace dercluster
