#pragma once

// Reference implementations the tests trust instead of the library: an
// independent canonical-partition enumerator, Stirling counts, and naive
// objective evaluators written as directly as possible.

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <limits>
#include <vector>

#include "dercluster/core.hpp"
#include "dercluster/rng.hpp"

namespace oracle {

// Restricted growth strings: label[i] <= 1 + max(label[0..i-1]), capped at
// max_clusters - 1. Visits every canonical partition exactly once, in
// lexicographic order.
inline void enumerate_partitions(int n, int max_clusters,
                                 const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> labels(static_cast<std::size_t>(n), 0);
  std::function<void(int, int)> step = [&](int i, int max_used) {
    if (i == n) {
      visit(labels);
      return;
    }
    const int top = std::min(max_used + 1, max_clusters - 1);
    for (int c = 0; c <= top; ++c) {
      labels[static_cast<std::size_t>(i)] = c;
      step(i + 1, std::max(max_used, c));
    }
  };
  if (n > 0) step(1, 0);  // labels[0] pinned to 0
  else visit(labels);
}

// S(n, k) by the standard recurrence.
inline std::int64_t stirling2(int n, int k) {
  if (n == 0 && k == 0) return 1;
  if (n == 0 || k == 0 || k > n) return 0;
  std::vector<std::vector<std::int64_t>> s(static_cast<std::size_t>(n + 1),
                                           std::vector<std::int64_t>(static_cast<std::size_t>(k + 1), 0));
  s[0][0] = 1;
  for (int i = 1; i <= n; ++i)
    for (int j = 1; j <= std::min(i, k); ++j)
      s[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          static_cast<std::int64_t>(j) * s[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j)] +
          s[static_cast<std::size_t>(i - 1)][static_cast<std::size_t>(j - 1)];
  return s[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
}

inline std::int64_t partitions_up_to(int n, int max_clusters) {
  std::int64_t total = 0;
  for (int j = 1; j <= max_clusters; ++j) total += stirling2(n, j);
  return total;
}

// Aggregate variance of one group as the full double sum over the
// covariance matrix (diagonal included), a different formulation from the
// library's ordered single-pass accumulation.
inline double group_variance(const Eigen::MatrixXd& covariance, const std::vector<int>& labels,
                             int group) {
  double v = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] != group) continue;
    for (std::size_t j = 0; j < labels.size(); ++j) {
      if (labels[j] != group) continue;
      v += covariance(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j));
    }
  }
  return v;
}

inline double worst_group_variance(const Eigen::MatrixXd& covariance,
                                   const std::vector<int>& labels, int max_clusters) {
  double worst = 0.0;
  for (int g = 0; g < max_clusters; ++g)
    worst = std::max(worst, group_variance(covariance, labels, g));
  return worst;
}

inline double surrogate_objective(const Eigen::VectorXd& variances,
                                  const Eigen::VectorXd& feature_corr,
                                  const std::vector<int>& labels, int max_clusters,
                                  double a, double b) {
  double worst_var_sum = 0.0;
  double worst_abs_mass = 0.0;
  for (int g = 0; g < max_clusters; ++g) {
    double var_sum = 0.0;
    double mass = 0.0;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != g) continue;
      var_sum += variances[static_cast<Eigen::Index>(i)];
      mass += feature_corr[static_cast<Eigen::Index>(i)] * variances[static_cast<Eigen::Index>(i)];
    }
    worst_var_sum = std::max(worst_var_sum, var_sum);
    worst_abs_mass = std::max(worst_abs_mass, std::abs(mass));
  }
  return a * worst_var_sum + b * worst_abs_mass;
}

struct BestPartition {
  double objective = std::numeric_limits<double>::infinity();
  std::vector<int> labels;
};

// Exhaustive minimizer of the true objective; first optimum in enumeration
// order wins, which is the lexicographically smallest one.
inline BestPartition best_true_partition(const Eigen::MatrixXd& covariance, int n,
                                         int max_clusters) {
  BestPartition best;
  enumerate_partitions(n, max_clusters, [&](const std::vector<int>& labels) {
    const double value = worst_group_variance(covariance, labels, max_clusters);
    if (value < best.objective) {
      best.objective = value;
      best.labels = labels;
    }
  });
  return best;
}

inline BestPartition best_surrogate_partition(const Eigen::VectorXd& variances,
                                              const Eigen::VectorXd& feature_corr, int n,
                                              int max_clusters, double a, double b) {
  BestPartition best;
  enumerate_partitions(n, max_clusters, [&](const std::vector<int>& labels) {
    const double value = surrogate_objective(variances, feature_corr, labels, max_clusters, a, b);
    if (value < best.objective) {
      best.objective = value;
      best.labels = labels;
    }
  });
  return best;
}

// Random positive semidefinite instance for solver tests; moments need not
// come from any time series.
inline dercluster::InstanceStats random_instance(int n, dercluster::Rng& rng) {
  Eigen::MatrixXd factors(n, n + 2);
  for (Eigen::Index r = 0; r < factors.rows(); ++r)
    for (Eigen::Index c = 0; c < factors.cols(); ++c) factors(r, c) = rng.normal();
  dercluster::InstanceStats stats;
  stats.covariance = factors * factors.transpose() / static_cast<double>(n + 2);
  stats.variances = stats.covariance.diagonal();
  stats.means = Eigen::VectorXd::Zero(n);
  stats.feature_corr = Eigen::VectorXd(n);
  for (int i = 0; i < n; ++i) {
    stats.feature_corr[i] = rng.uniform(-1.0, 1.0);
    stats.means[i] = rng.uniform(-5.0, 5.0);
    stats.der_ids.push_back("der" + std::to_string(i));
    stats.kinds.push_back(dercluster::DerKind::load);
  }
  stats.sample_count = 1000;
  return stats;
}

}  // namespace oracle
