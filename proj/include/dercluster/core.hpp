#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dercluster/timestamp.hpp"

namespace dercluster {

enum class DerKind { pv_generator, load };

std::string to_string(DerKind k);

// One metered resource: a signed power series in watts on a uniform sampling
// grid. Generation is negative, consumption positive. Missing readings are
// stored as NaN so the grid itself stays intact.
struct DerProfile {
  std::string id;
  DerKind kind = DerKind::load;
  std::vector<Timestamp> times;
  Eigen::VectorXd watts;  // same length as times, NaN where missing
};

struct FeatureSeries {
  std::string name;
  std::vector<Timestamp> times;
  Eigen::VectorXd values;  // NaN where missing
};

// Throws std::invalid_argument unless timestamps are strictly increasing and
// every gap is a whole multiple of the smallest gap (one underlying period).
void validate_grid(const std::vector<Timestamp>& times, const std::string& what);

// Profiles and feature restricted to the timestamps every series covers.
struct AlignedData {
  std::vector<std::string> der_ids;
  std::vector<DerKind> kinds;
  std::vector<Timestamp> times;
  Eigen::MatrixXd watts;    // T x n, column i belongs to der_ids[i]
  Eigen::VectorXd feature;  // length T
  std::string feature_name;

  int size() const { return static_cast<int>(watts.cols()); }
  std::int64_t samples() const { return watts.rows(); }
};

// Second moments of one aligned instance; the covariance uses the unbiased
// (T-1) divisor and variances are exactly its diagonal.
struct InstanceStats {
  std::vector<std::string> der_ids;
  std::vector<DerKind> kinds;
  Eigen::VectorXd means;
  Eigen::VectorXd variances;
  Eigen::MatrixXd covariance;
  Eigen::VectorXd feature_corr;
  std::int64_t sample_count = 0;

  int size() const { return static_cast<int>(means.size()); }
};

// Group labels in [0, num_clusters_max). Canonical form: labels appear in
// first-use order, so member 0 is always in cluster 0.
struct ClusterAssignment {
  std::vector<int> cluster_of;
  int num_clusters_max = 0;

  int clusters_used() const;
};

// Relabels into first-use order: [2,2,0,1] -> [0,0,1,2]. Throws
// std::invalid_argument on labels outside [0, num_clusters_max).
ClusterAssignment canonicalize(const std::vector<int>& raw, int num_clusters_max);

bool is_canonical(const std::vector<int>& labels);

// True when two label vectors describe the same grouping.
bool same_partition(const std::vector<int>& a, const std::vector<int>& b);

enum class Model { proxy, covariance, brute_force, monte_carlo_best };

std::string to_string(Model m);
Model model_from_string(const std::string& name);

struct SolverConfig {
  double weight_a = 1.0;
  double weight_b = 1.0;
  std::optional<double> time_limit_s;
  std::uint64_t rng_seed = 0;
  int max_clusters = 1;
};

struct IncumbentRecord {
  double objective = 0.0;
  double at_time_s = 0.0;
};

struct SearchDiagnostics {
  std::int64_t nodes_explored = 0;
  std::int64_t nodes_pruned = 0;
  std::int64_t partitions_evaluated = 0;
  std::vector<IncumbentRecord> incumbent_history;
  bool proof_of_optimality = false;
};

struct SolveReport {
  Model model = Model::proxy;
  ClusterAssignment assignment;
  double max_true_variance = 0.0;  // largest aggregate variance over clusters
  double model_objective = 0.0;
  Eigen::VectorXd per_cluster_variance;  // one slot per cluster, 0 when empty
  double solve_time_s = 0.0;
  SearchDiagnostics diagnostics;
};

// Binary variables per cluster an equivalent MILP would carry; reported for
// context, never constructed.
std::int64_t milp_binaries_per_cluster(Model m, int n);

// Which quantile of each member's marginal to add up; valid only when
// w = sum(u) + 1 - n stays nonnegative.
struct BoundQuery {
  std::vector<int> member_indices;
  Eigen::VectorXd quantile_levels;

  double w() const {
    return quantile_levels.sum() + 1.0 -
           static_cast<double>(quantile_levels.size());
  }
};

struct BoundResult {
  BoundQuery query;
  double quantile_sum = 0.0;
  double w = 0.0;
  double mean_sum = 0.0;          // mean of the aggregate series
  double std_lower_bound = 0.0;   // may be <= 0; see vacuous
  bool vacuous = false;           // bound carries no information when true
};

}  // namespace dercluster
