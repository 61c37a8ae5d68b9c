#include "dercluster/stats.hpp"

#include <algorithm>
#include <cmath>

#include "dercluster/ingest.hpp"

namespace dercluster {

namespace {

InstanceStats estimate_impl(const Eigen::MatrixXd& watts, const Eigen::VectorXd& feature,
                            const std::vector<std::string>* ids) {
  const Eigen::Index t = watts.rows();
  const Eigen::Index n = watts.cols();
  if (n < 1) throw std::invalid_argument("estimate: no profiles");
  if (t != feature.size())
    throw std::invalid_argument("estimate: feature length does not match sample count");
  if (t < 2) throw std::invalid_argument("estimate: need at least 2 samples");

  InstanceStats out;
  out.sample_count = t;
  out.means = watts.colwise().mean();
  out.covariance = sample_covariance_matrix(watts);
  out.variances = out.covariance.diagonal();

  std::string constant;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (out.variances[i] == 0.0) {
      if (!constant.empty()) constant += ", ";
      constant += ids ? (*ids)[static_cast<std::size_t>(i)]
                      : "column " + std::to_string(i);
    }
  }
  const double feature_var = sample_variance(feature);
  if (feature_var == 0.0) {
    if (!constant.empty()) constant += ", ";
    constant += "feature";
  }
  if (!constant.empty())
    throw std::invalid_argument(
        "estimate: correlation undefined for constant series: " + constant);

  out.feature_corr.resize(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out.feature_corr[i] = pearson_correlation(watts.col(i), feature);
  return out;
}

}  // namespace

InstanceStats estimate(const AlignedData& data) {
  InstanceStats out = estimate_impl(data.watts, data.feature, &data.der_ids);
  out.der_ids = data.der_ids;
  out.kinds = data.kinds;
  return out;
}

InstanceStats estimate(const Eigen::MatrixXd& watts, const Eigen::VectorXd& feature) {
  return estimate_impl(watts, feature, nullptr);
}

double cluster_variance(const InstanceStats& stats, const std::vector<int>& members) {
  std::vector<int> m = members;
  std::sort(m.begin(), m.end());
  for (int i : m)
    if (i < 0 || i >= stats.size())
      throw std::invalid_argument("cluster_variance: member index out of range");
  double v = 0.0;
  for (std::size_t k = 0; k < m.size(); ++k) {
    double cross = 0.0;
    for (std::size_t l = 0; l < k; ++l) cross += stats.covariance(m[l], m[k]);
    v += stats.variances[m[k]] + 2.0 * cross;
  }
  return v;
}

Eigen::VectorXd per_cluster_variances(const InstanceStats& stats,
                                      const ClusterAssignment& assignment) {
  if (static_cast<int>(assignment.cluster_of.size()) != stats.size())
    throw std::invalid_argument("per_cluster_variances: assignment size mismatch");
  const int k = assignment.num_clusters_max;
  std::vector<std::vector<int>> groups(static_cast<std::size_t>(k));
  for (std::size_t i = 0; i < assignment.cluster_of.size(); ++i) {
    const int c = assignment.cluster_of[i];
    if (c < 0 || c >= k)
      throw std::invalid_argument("per_cluster_variances: label out of range");
    groups[static_cast<std::size_t>(c)].push_back(static_cast<int>(i));
  }
  Eigen::VectorXd out(k);
  for (int c = 0; c < k; ++c)
    out[c] = cluster_variance(stats, groups[static_cast<std::size_t>(c)]);
  return out;
}

double max_cluster_variance(const InstanceStats& stats,
                            const ClusterAssignment& assignment) {
  const Eigen::VectorXd v = per_cluster_variances(stats, assignment);
  return v.size() ? v.maxCoeff() : 0.0;
}

ProxyTerms proxy_terms(const InstanceStats& stats, const ClusterAssignment& assignment) {
  if (static_cast<int>(assignment.cluster_of.size()) != stats.size())
    throw std::invalid_argument("proxy_terms: assignment size mismatch");
  const int k = assignment.num_clusters_max;
  Eigen::VectorXd var_sum = Eigen::VectorXd::Zero(k);
  Eigen::VectorXd proxy_sum = Eigen::VectorXd::Zero(k);
  for (std::size_t i = 0; i < assignment.cluster_of.size(); ++i) {
    const int c = assignment.cluster_of[i];
    if (c < 0 || c >= k)
      throw std::invalid_argument("proxy_terms: label out of range");
    const auto idx = static_cast<Eigen::Index>(i);
    var_sum[c] += stats.variances[idx];
    proxy_sum[c] += stats.feature_corr[idx] * stats.variances[idx];
  }
  ProxyTerms out;
  out.y = k ? var_sum.maxCoeff() : 0.0;
  out.z = k ? proxy_sum.cwiseAbs().maxCoeff() : 0.0;
  return out;
}

double proxy_objective(const InstanceStats& stats, const ClusterAssignment& assignment,
                       const SolverConfig& config) {
  const ProxyTerms t = proxy_terms(stats, assignment);
  return config.weight_a * t.y + config.weight_b * t.z;
}

AggregateStats aggregate_stats(const InstanceStats& stats, const std::vector<int>& members) {
  AggregateStats out;
  if (members.empty()) return out;
  for (int i : members) {
    if (i < 0 || i >= stats.size())
      throw std::invalid_argument("aggregate_stats: member index out of range");
    out.mean += stats.means[i];
  }
  out.variance = cluster_variance(stats, members);
  out.stddev = out.variance > 0.0 ? std::sqrt(out.variance) : 0.0;
  return out;
}

FeatureSelection select_feature(const std::vector<DerProfile>& profiles,
                                const std::vector<FeatureSeries>& candidates) {
  if (profiles.empty()) throw std::invalid_argument("select_feature: no profiles");
  if (candidates.empty()) throw std::invalid_argument("select_feature: no candidates");

  FeatureSelection out;
  out.table.reserve(candidates.size());
  for (const FeatureSeries& candidate : candidates) {
    FeatureCandidateScore score;
    score.name = candidate.name;
    try {
      const AlignedData aligned = align(profiles, candidate);
      const InstanceStats stats = estimate(aligned);
      score.per_der_corr = stats.feature_corr;
      score.mean_abs_corr = stats.feature_corr.cwiseAbs().mean();
      score.sample_count = stats.sample_count;
      score.usable = true;
    } catch (const std::exception& e) {
      score.note = e.what();
    }
    out.table.push_back(std::move(score));
  }

  for (std::size_t i = 0; i < out.table.size(); ++i) {
    const FeatureCandidateScore& s = out.table[i];
    if (!s.usable) continue;
    if (out.chosen_index < 0) {
      out.chosen_index = static_cast<int>(i);
      continue;
    }
    const FeatureCandidateScore& best = out.table[static_cast<std::size_t>(out.chosen_index)];
    if (s.mean_abs_corr > best.mean_abs_corr ||
        (s.mean_abs_corr == best.mean_abs_corr && s.name < best.name))
      out.chosen_index = static_cast<int>(i);
  }
  if (out.chosen_index < 0)
    throw std::invalid_argument("select_feature: no usable candidate feature");
  return out;
}

}  // namespace dercluster
