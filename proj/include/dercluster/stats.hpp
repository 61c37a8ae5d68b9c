#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

#include "dercluster/core.hpp"

namespace dercluster {

// Expression-friendly moment kernels. All estimators use the unbiased (T-1)
// divisor; passing fewer than two samples throws std::invalid_argument.

template <typename Derived>
typename Derived::Scalar sample_mean(const Eigen::MatrixBase<Derived>& x) {
  if (x.size() < 1) throw std::invalid_argument("sample_mean: empty input");
  return x.derived().mean();
}

template <typename Derived>
typename Derived::Scalar sample_variance(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto n = x.size();
  if (n < 2) throw std::invalid_argument("sample_variance: need at least 2 samples");
  const Scalar mu = x.derived().mean();
  return (x.derived().array() - mu).matrix().squaredNorm() / static_cast<Scalar>(n - 1);
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar sample_covariance(const Eigen::MatrixBase<DerivedA>& x,
                                            const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  const auto n = x.size();
  if (n != y.size()) throw std::invalid_argument("sample_covariance: length mismatch");
  if (n < 2) throw std::invalid_argument("sample_covariance: need at least 2 samples");
  const Scalar mx = x.derived().mean();
  const Scalar my = y.derived().mean();
  return (x.derived().array() - mx).matrix().dot((y.derived().array() - my).matrix()) /
         static_cast<Scalar>(n - 1);
}

template <typename DerivedA, typename DerivedB>
typename DerivedA::Scalar pearson_correlation(const Eigen::MatrixBase<DerivedA>& x,
                                              const Eigen::MatrixBase<DerivedB>& y) {
  using Scalar = typename DerivedA::Scalar;
  const Scalar vx = sample_variance(x);
  const Scalar vy = sample_variance(y);
  if (vx == Scalar(0) || vy == Scalar(0))
    throw std::invalid_argument("pearson_correlation: constant series");
  return sample_covariance(x, y) / std::sqrt(vx * vy);
}

// Unbiased covariance matrix of the columns of a T x n matrix.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
sample_covariance_matrix(const Eigen::MatrixBase<Derived>& x) {
  using Scalar = typename Derived::Scalar;
  const auto t = x.rows();
  if (t < 2)
    throw std::invalid_argument("sample_covariance_matrix: need at least 2 samples");
  auto centered =
      (x.derived().rowwise() - x.derived().colwise().mean()).eval();
  return centered.adjoint() * centered / static_cast<Scalar>(t - 1);
}

// Moments of one aligned instance. Throws when fewer than two samples are
// available or when any power column or the feature is constant (the
// correlation would be undefined); the message names the offending series.
InstanceStats estimate(const AlignedData& data);
InstanceStats estimate(const Eigen::MatrixXd& watts, const Eigen::VectorXd& feature);

// Variance of the summed series of the given members, from the covariance
// matrix: sum of variances plus twice the pairwise covariances. Members are
// visited in ascending index order so the result is a reproducible function
// of the member set. Empty set gives 0.
double cluster_variance(const InstanceStats& stats, const std::vector<int>& members);

// Per-slot aggregate variances of an assignment (0 for empty slots) and
// their maximum.
Eigen::VectorXd per_cluster_variances(const InstanceStats& stats,
                                      const ClusterAssignment& assignment);
double max_cluster_variance(const InstanceStats& stats,
                            const ClusterAssignment& assignment);

// Surrogate objective: y is the worst per-cluster sum of variances, z the
// worst per-cluster |sum of corr_i * var_i|; the objective is a*y + b*z.
struct ProxyTerms {
  double y = 0.0;
  double z = 0.0;
};

ProxyTerms proxy_terms(const InstanceStats& stats, const ClusterAssignment& assignment);
double proxy_objective(const InstanceStats& stats, const ClusterAssignment& assignment,
                       const SolverConfig& config);

// Mean, variance and standard deviation of the aggregate series of a member
// set; zeros for the empty set.
struct AggregateStats {
  double mean = 0.0;
  double variance = 0.0;
  double stddev = 0.0;
};

AggregateStats aggregate_stats(const InstanceStats& stats, const std::vector<int>& members);

// Correlation screening of candidate features against a set of profiles.
struct FeatureCandidateScore {
  std::string name;
  bool usable = false;
  std::string note;  // set when the candidate was skipped
  Eigen::VectorXd per_der_corr;
  double mean_abs_corr = 0.0;
  std::int64_t sample_count = 0;
};

struct FeatureSelection {
  int chosen_index = -1;
  std::vector<FeatureCandidateScore> table;
};

// Scores each candidate by the mean |correlation| against all profiles on
// the candidate's own overlap window; ties go to the lexicographically
// smallest name. Unusable candidates (no overlap, too short, constant
// series) are kept in the table with a note; if none is usable, throws.
FeatureSelection select_feature(const std::vector<DerProfile>& profiles,
                                const std::vector<FeatureSeries>& candidates);

}  // namespace dercluster
