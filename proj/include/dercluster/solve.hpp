#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "dercluster/core.hpp"

namespace dercluster {

// Exhaustive enumeration over canonical partitions into at most K groups.
// Refuses instances beyond brute_force_max_ders. Among optimal partitions
// the lexicographically smallest canonical label vector is returned.
inline constexpr int brute_force_max_ders = 22;
SolveReport solve_brute_force(const InstanceStats& stats, int max_clusters,
                              const SolverConfig& config = {});

// Branch-and-bound on the true aggregate-variance objective; same optimum
// as brute force. With a time limit it returns the incumbent and clears
// proof_of_optimality.
SolveReport solve_covariance(const InstanceStats& stats, int max_clusters,
                             const SolverConfig& config = {});

// Branch-and-bound on the surrogate objective a*y + b*z; the report still
// carries the true aggregate variance of the returned grouping.
SolveReport solve_proxy(const InstanceStats& stats, int max_clusters,
                        const SolverConfig& config = {});

// Uniform random assignments as a baseline. Sample i draws from its own
// stream seeded by (seed, i), so results do not depend on chunking; ties on
// the best objective go to the smallest sample index.
struct McResult {
  Eigen::VectorXd sorted_objectives;  // ascending, one per sample
  ClusterAssignment best_assignment;
  std::int64_t best_sample_index = -1;
  double best_objective = 0.0;
};

McResult mc_baseline(const InstanceStats& stats, int max_clusters, std::int64_t n_samples,
                     std::uint64_t seed);

// Where a value falls in a sorted sample: the fraction strictly below it and
// the fraction at or below it.
struct Percentiles {
  double strict_pct = 0.0;
  double leq_pct = 0.0;
};

Percentiles percentile_of(double value, const Eigen::Ref<const Eigen::VectorXd>& sorted_sample);

// Wraps an MC baseline into the common report shape.
SolveReport mc_best_report(const InstanceStats& stats, int max_clusters,
                           std::int64_t n_samples, std::uint64_t seed);

}  // namespace dercluster
