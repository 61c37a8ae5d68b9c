#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <vector>

#include "dercluster/ingest.hpp"
#include "dercluster/rng.hpp"
#include "dercluster/stats.hpp"
#include "oracle_helpers.hpp"

using namespace dercluster;

namespace {

InstanceStats stats_from(const Eigen::VectorXd& variances, const Eigen::MatrixXd& covariance,
                         const Eigen::VectorXd& feature_corr) {
  InstanceStats s;
  s.variances = variances;
  s.covariance = covariance;
  s.feature_corr = feature_corr;
  s.means = Eigen::VectorXd::Zero(variances.size());
  s.sample_count = 100;
  for (Eigen::Index i = 0; i < variances.size(); ++i) {
    s.der_ids.push_back("der" + std::to_string(i));
    s.kinds.push_back(DerKind::load);
  }
  return s;
}

ClusterAssignment labels(std::vector<int> v, int k) {
  ClusterAssignment a;
  a.cluster_of = std::move(v);
  a.num_clusters_max = k;
  return a;
}

}  // namespace

TEST_SUITE_BEGIN("stats");

TEST_CASE("moment kernels on hand-checked series") {
  Eigen::Vector3d x(1, 2, 3), y(2, 4, 6);
  CHECK(sample_mean(x) == doctest::Approx(2.0));
  CHECK(sample_variance(x) == doctest::Approx(1.0));
  CHECK(sample_covariance(x, y) == doctest::Approx(2.0));
  CHECK(sample_covariance(x, x) == doctest::Approx(sample_variance(x)));
  CHECK_THROWS_AS(sample_variance(Eigen::VectorXd::Ones(1)), std::invalid_argument);
  Eigen::VectorXd two(2);
  two << 1, 2;
  CHECK_THROWS_AS(sample_covariance(Eigen::VectorXd(x), two), std::invalid_argument);
}

TEST_CASE("correlation is +1 against itself and -1 against its negation") {
  Eigen::VectorXd f(5);
  f << 3, 1, 4, 1, 5;
  CHECK(pearson_correlation(f, f) == doctest::Approx(1.0));
  CHECK(pearson_correlation((-f).eval(), f) == doctest::Approx(-1.0));
  CHECK_THROWS_AS(pearson_correlation(Eigen::Vector3d::Ones(), f.head(3)),
                  std::invalid_argument);
}

TEST_CASE("covariance matrix agrees with the pairwise kernel and is PSD") {
  Rng rng(42);
  Eigen::MatrixXd x(40, 5);
  for (Eigen::Index r = 0; r < x.rows(); ++r)
    for (Eigen::Index c = 0; c < x.cols(); ++c) x(r, c) = rng.normal();
  const Eigen::MatrixXd cov = sample_covariance_matrix(x);
  for (Eigen::Index i = 0; i < 5; ++i)
    for (Eigen::Index j = 0; j < 5; ++j)
      CHECK(cov(i, j) == doctest::Approx(sample_covariance(x.col(i), x.col(j))));
  const Eigen::VectorXd eig = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cov).eigenvalues();
  CHECK(eig.minCoeff() >= -1e-12 * eig.cwiseAbs().maxCoeff());
}

TEST_CASE("estimate populates moments and validates input") {
  Eigen::MatrixXd watts(4, 2);
  watts << 1, 2, 2, 4, 3, 6, 4, 8;
  Eigen::VectorXd feature(4);
  feature << 4, 3, 2, 1;
  const InstanceStats s = estimate(watts, feature);
  CHECK(s.size() == 2);
  CHECK(s.sample_count == 4);
  CHECK(s.means[0] == doctest::Approx(2.5));
  CHECK(s.variances[0] == s.covariance(0, 0));
  CHECK(s.variances[1] == s.covariance(1, 1));
  CHECK(s.feature_corr[0] == doctest::Approx(-1.0));
  CHECK(s.feature_corr[1] == doctest::Approx(-1.0));

  CHECK_THROWS_AS(estimate(watts.topRows(1), feature.head(1)), std::invalid_argument);
  CHECK_THROWS_AS(estimate(watts, feature.head(3)), std::invalid_argument);
}

TEST_CASE("estimate names every constant series in its error") {
  Eigen::MatrixXd watts(3, 2);
  watts << 5, 1, 5, 2, 5, 3;
  Eigen::VectorXd feature(3);
  feature << 1, 2, 3;
  AlignedData data;
  data.der_ids = {"flat", "load9"};
  data.kinds = {DerKind::load, DerKind::load};
  data.watts = watts;
  data.feature = feature;
  try {
    estimate(data);
    FAIL("expected a constant-series error");
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    CHECK(what.find("flat") != std::string::npos);
    CHECK(what.find("load9") == std::string::npos);
  }
  data.feature = Eigen::Vector3d::Ones();
  data.watts.col(0) = Eigen::Vector3d(1, 2, 4);
  try {
    estimate(data);
    FAIL("expected a constant-feature error");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("feature") != std::string::npos);
  }
}

TEST_CASE("cluster variance on hand-checked groups") {
  Eigen::MatrixXd cov(3, 3);
  cov << 1.0, -0.5, 0.5, -0.5, 1.0, 0.5, 0.5, 0.5, 2.0;
  const InstanceStats two = stats_from(cov.diagonal().head(2), cov.topLeftCorner(2, 2),
                                       Eigen::Vector2d::Zero());
  CHECK(cluster_variance(two, {0, 1}) == doctest::Approx(1.0));
  CHECK(cluster_variance(two, {1}) == 1.0);
  CHECK(cluster_variance(two, {}) == 0.0);

  Eigen::MatrixXd cov3(3, 3);
  cov3 << 1.0, 0.5, 0.5, 0.5, 2.0, 0.5, 0.5, 0.5, 3.0;
  const InstanceStats three = stats_from(cov3.diagonal(), cov3, Eigen::Vector3d::Zero());
  CHECK(cluster_variance(three, {0, 1, 2}) == doctest::Approx(9.0));
  CHECK_THROWS_AS(cluster_variance(three, {3}), std::invalid_argument);
  CHECK(cluster_variance(three, {2, 0}) == cluster_variance(three, {0, 2}));
}

TEST_CASE("cluster variance matches the full double-sum oracle") {
  Rng rng(9001);
  for (int trial = 0; trial < 40; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(7));
    const InstanceStats s = oracle::random_instance(n, rng);
    std::vector<int> members, labels_vec(static_cast<std::size_t>(n), 1);
    for (int i = 0; i < n; ++i)
      if (rng.below(2)) {
        members.push_back(i);
        labels_vec[static_cast<std::size_t>(i)] = 0;
      }
    const double expected = oracle::group_variance(s.covariance, labels_vec, 0);
    CHECK(cluster_variance(s, members) == doctest::Approx(expected).epsilon(1e-12));
  }
}

TEST_CASE("worst-cluster variance on known partitions") {
  Eigen::VectorXd variances(4);
  variances << 1, 2, 3, 4;
  const InstanceStats s = stats_from(variances, variances.asDiagonal(),
                                     Eigen::VectorXd::Zero(4));
  CHECK(max_cluster_variance(s, labels({0, 0, 0, 0}, 1)) == doctest::Approx(10.0));
  CHECK(max_cluster_variance(s, labels({0, 1, 2, 3}, 4)) == doctest::Approx(4.0));
  CHECK(max_cluster_variance(s, labels({0, 1, 1, 0}, 2)) == doctest::Approx(5.0));
}

TEST_CASE("worst-cluster variance ignores the labeling") {
  Rng rng(5);
  const InstanceStats s = oracle::random_instance(6, rng);
  const ClusterAssignment raw = labels({2, 0, 2, 1, 0, 2}, 3);
  const ClusterAssignment canon = canonicalize(raw.cluster_of, 3);
  CHECK(max_cluster_variance(s, raw) == max_cluster_variance(s, canon));
}

TEST_CASE("full-set variance equals the variance of the summed series") {
  SynthSpec spec;
  spec.n_pv = 3;
  spec.n_load = 4;
  spec.n_samples = 800;
  spec.rng_seed = 77;
  const SynthResult synth = synthesize(spec);
  const AlignedData data = align(synth.profiles, synth.feature);
  const InstanceStats s = estimate(data);
  std::vector<int> all;
  for (int i = 0; i < s.size(); ++i) all.push_back(i);
  const double direct = sample_variance(data.watts.rowwise().sum().eval());
  CHECK(cluster_variance(s, all) == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("surrogate objective on hand-checked clusters") {
  Eigen::VectorXd variances(2), corr(2);
  variances << 2, 2;

  corr << 0.8, -0.8;
  InstanceStats s = stats_from(variances, variances.asDiagonal(), corr);
  ProxyTerms t = proxy_terms(s, labels({0, 0}, 1));
  CHECK(t.y == doctest::Approx(4.0));
  CHECK(t.z == doctest::Approx(0.0));
  CHECK(proxy_objective(s, labels({0, 0}, 1), SolverConfig{}) == doctest::Approx(4.0));

  corr << -0.8, -0.8;
  s = stats_from(variances, variances.asDiagonal(), corr);
  t = proxy_terms(s, labels({0, 0}, 1));
  CHECK(t.y == doctest::Approx(4.0));
  CHECK(t.z == doctest::Approx(3.2));
  CHECK(proxy_objective(s, labels({0, 0}, 1), SolverConfig{}) == doctest::Approx(7.2));

  SolverConfig weighted;
  weighted.weight_a = 2.0;
  weighted.weight_b = 1.0;
  CHECK(proxy_objective(s, labels({0, 0}, 1), weighted) == doctest::Approx(11.2));
}

TEST_CASE("surrogate objective dominates both of its terms") {
  Rng rng(31);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 2 + static_cast<int>(rng.below(6));
    const int k = 1 + static_cast<int>(rng.below(4));
    const InstanceStats s = oracle::random_instance(n, rng);
    std::vector<int> v;
    for (int i = 0; i < n; ++i) v.push_back(static_cast<int>(rng.below(static_cast<std::uint64_t>(k))));
    const ClusterAssignment a = canonicalize(v, k);
    const ProxyTerms t = proxy_terms(s, a);
    const double objective = proxy_objective(s, a, SolverConfig{});
    CHECK(t.y >= 0.0);
    CHECK(t.z >= 0.0);
    CHECK(objective >= t.y);
    CHECK(objective >= t.z);
    CHECK(objective == doctest::Approx(oracle::surrogate_objective(
        s.variances, s.feature_corr, a.cluster_of, k, 1.0, 1.0)));
  }
}

TEST_CASE("aggregate stats of member sets") {
  Eigen::VectorXd variances(2);
  variances << 4.0, 4.0;
  Eigen::MatrixXd cov(2, 2);
  cov << 4.0, 4.0, 4.0, 4.0;  // the same series twice
  InstanceStats s = stats_from(variances, cov, Eigen::Vector2d::Zero());
  s.means << 1.0, -1.0;
  const AggregateStats both = aggregate_stats(s, {0, 1});
  CHECK(both.mean == doctest::Approx(0.0));
  CHECK(both.variance == doctest::Approx(16.0));
  CHECK(both.stddev == doctest::Approx(4.0));
  const AggregateStats one = aggregate_stats(s, {0});
  CHECK(one.mean == doctest::Approx(1.0));
  CHECK(one.variance == doctest::Approx(4.0));
  const AggregateStats none = aggregate_stats(s, {});
  CHECK(none.mean == 0.0);
  CHECK(none.variance == 0.0);
  CHECK(none.stddev == 0.0);
}

TEST_CASE("feature screening picks the strongest candidate") {
  SynthSpec spec;
  spec.n_pv = 2;
  spec.n_load = 2;
  spec.n_samples = 300;
  spec.rng_seed = 3;
  const SynthResult synth = synthesize(spec);

  FeatureSeries strong = synth.feature;
  strong.name = "radiation";
  FeatureSeries weak = synth.feature;
  weak.name = "noise";
  Rng rng(8);
  for (Eigen::Index i = 0; i < weak.values.size(); ++i) weak.values[i] = rng.normal();

  const FeatureSelection pick = select_feature(synth.profiles, {weak, strong});
  CHECK(pick.table[static_cast<std::size_t>(pick.chosen_index)].name == "radiation");
  CHECK(pick.table.size() == 2);
  CHECK(pick.table[0].usable);
  CHECK(pick.table[1].usable);
  CHECK(pick.table[1].mean_abs_corr > pick.table[0].mean_abs_corr);
}

TEST_CASE("feature screening: single candidate, ties, and unusable candidates") {
  SynthSpec spec;
  spec.n_pv = 1;
  spec.n_load = 1;
  spec.n_samples = 100;
  const SynthResult synth = synthesize(spec);

  const FeatureSelection only = select_feature(synth.profiles, {synth.feature});
  CHECK(only.chosen_index == 0);

  FeatureSeries beta = synth.feature;
  beta.name = "beta";
  FeatureSeries alpha = synth.feature;
  alpha.name = "alpha";
  const FeatureSelection tie = select_feature(synth.profiles, {beta, alpha});
  CHECK(tie.table[static_cast<std::size_t>(tie.chosen_index)].name == "alpha");

  FeatureSeries disjoint = synth.feature;
  disjoint.name = "elsewhere";
  for (Timestamp& t : disjoint.times) t.epoch_s += 86400 * 365;
  const FeatureSelection skipped = select_feature(synth.profiles, {disjoint, synth.feature});
  CHECK(!skipped.table[0].usable);
  CHECK(!skipped.table[0].note.empty());
  CHECK(skipped.chosen_index == 1);
  CHECK_THROWS_AS(select_feature(synth.profiles, {disjoint}), std::invalid_argument);
}

TEST_SUITE_END();
