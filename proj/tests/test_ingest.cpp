#include <doctest.h>

#include <unistd.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "dercluster/ingest.hpp"
#include "dercluster/stats.hpp"

using namespace dercluster;

namespace {

struct TempDir {
  std::filesystem::path path;
  TempDir() {
    path = std::filesystem::temp_directory_path() /
           ("dercluster_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(path);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
  std::string file(const std::string& name) const { return (path / name).string(); }
};

std::string write_file(const TempDir& dir, const std::string& name, const std::string& body) {
  const std::string p = dir.file(name);
  std::ofstream out(p);
  out << body;
  return p;
}

}  // namespace

TEST_SUITE_BEGIN("ingest");

TEST_CASE("window filter keeps [start, end) hours in the row's own offset") {
  WindowFilter filter;
  filter.hour_start = 9;
  filter.hour_end = 18;
  CHECK(!passes(filter, parse_timestamp("2019-06-01T08:45:00+02:00")));
  CHECK(passes(filter, parse_timestamp("2019-06-01T09:00:00+02:00")));
  CHECK(passes(filter, parse_timestamp("2019-06-01T17:59:59+02:00")));
  CHECK(!passes(filter, parse_timestamp("2019-06-01T18:00:00+02:00")));
  // The same instant, written in two offsets: the row's own offset decides.
  filter.hour_start = 10;
  CHECK(passes(filter, parse_timestamp("2019-06-01T10:00:00+02:00")));
  CHECK(!passes(filter, parse_timestamp("2019-06-01T08:00:00Z")));
}

TEST_CASE("window filter dates are inclusive on both ends") {
  WindowFilter filter;
  filter.date_start = parse_date("2019-03-31");
  filter.date_end = parse_date("2019-10-27");
  CHECK(passes(filter, parse_timestamp("2019-03-31T00:00:00+02:00")));
  CHECK(passes(filter, parse_timestamp("2019-10-27T23:59:59+02:00")));
  CHECK(!passes(filter, parse_timestamp("2019-03-30T23:59:59+02:00")));
  CHECK(!passes(filter, parse_timestamp("2019-10-28T00:00:00+02:00")));
}

TEST_CASE("window filter validation") {
  WindowFilter filter;
  filter.hour_start = 9;
  filter.hour_end = 9;
  CHECK_THROWS_AS(validate(filter), std::invalid_argument);
  filter.hour_end = 25;
  CHECK_THROWS_AS(validate(filter), std::invalid_argument);
  filter.hour_start = -1;
  filter.hour_end = 24;
  CHECK_THROWS_AS(validate(filter), std::invalid_argument);
  filter = WindowFilter{};
  filter.date_start = parse_date("2019-10-27");
  filter.date_end = parse_date("2019-03-31");
  CHECK_THROWS_AS(validate(filter), std::invalid_argument);
}

TEST_CASE("load_profiles reads the wide format and applies the filter") {
  TempDir dir;
  const std::string path = write_file(dir, "p.csv",
      "timestamp,pv1,house\n"
      "2019-06-01T08:45:00+02:00,-1.5,2\n"
      "2019-06-01T09:00:00+02:00,-2.5,\n"
      "2019-06-01T09:15:00+02:00,-3.5,4\n"
      "2019-06-01T18:00:00+02:00,-4.5,5\n");
  WindowFilter filter;
  filter.hour_start = 9;
  filter.hour_end = 18;
  const std::vector<DerProfile> profiles = load_profiles(path, filter);
  REQUIRE(profiles.size() == 2);
  CHECK(profiles[0].id == "pv1");
  CHECK(profiles[0].kind == DerKind::pv_generator);
  CHECK(profiles[1].id == "house");
  CHECK(profiles[1].kind == DerKind::load);
  REQUIRE(profiles[0].times.size() == 2);
  CHECK(profiles[0].watts[0] == -2.5);
  CHECK(profiles[0].watts[1] == -3.5);
  CHECK(std::isnan(profiles[1].watts[0]));
  CHECK(profiles[1].watts[1] == 4.0);
}

TEST_CASE("load_profiles rejects malformed input") {
  TempDir dir;
  CHECK_THROWS_AS(load_profiles(write_file(dir, "dup.csv",
      "timestamp,pv1,pv1\n2019-06-01T09:00:00Z,1,2\n")), std::invalid_argument);
  CHECK_THROWS_AS(load_profiles(write_file(dir, "nonnum.csv",
      "timestamp,pv1\n2019-06-01T09:00:00Z,abc\n")), std::invalid_argument);
  CHECK_THROWS_AS(load_profiles(write_file(dir, "badts.csv",
      "timestamp,pv1\n2019-06-32T09:00:00Z,1\n")), std::invalid_argument);
  CHECK_THROWS_AS(load_profiles(write_file(dir, "short.csv",
      "timestamp,pv1,pv2\n2019-06-01T09:00:00Z,1\n")), std::invalid_argument);
  CHECK_THROWS_AS(load_profiles(write_file(dir, "nohdr.csv",
      "time,pv1\n2019-06-01T09:00:00Z,1\n")), std::invalid_argument);
  CHECK_THROWS_AS(load_profiles(dir.file("missing.csv")), std::runtime_error);
}

TEST_CASE("load_feature wants exactly one value column") {
  TempDir dir;
  const FeatureSeries f = load_feature(write_file(dir, "f.csv",
      "timestamp,radiation\n2019-06-01T09:00:00Z,650.25\n2019-06-01T09:15:00Z,\n"));
  CHECK(f.name == "radiation");
  REQUIRE(f.values.size() == 2);
  CHECK(f.values[0] == 650.25);
  CHECK(std::isnan(f.values[1]));
  CHECK_THROWS_AS(load_feature(write_file(dir, "wide.csv",
      "timestamp,a,b\n2019-06-01T09:00:00Z,1,2\n")), std::invalid_argument);
}

TEST_CASE("write and load round-trip bit-exactly") {
  SynthSpec spec;
  spec.n_pv = 2;
  spec.n_load = 3;
  spec.n_samples = 50;
  spec.rng_seed = 5;
  SynthResult synth = synthesize(spec);
  synth.profiles[1].watts[7] = std::nan("");  // a missing cell survives too

  TempDir dir;
  write_profiles(dir.file("p.csv"), synth.profiles);
  write_feature(dir.file("f.csv"), synth.feature);
  const std::vector<DerProfile> profiles = load_profiles(dir.file("p.csv"));
  const FeatureSeries feature = load_feature(dir.file("f.csv"));

  REQUIRE(profiles.size() == synth.profiles.size());
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    CHECK(profiles[i].id == synth.profiles[i].id);
    CHECK(profiles[i].kind == synth.profiles[i].kind);
    REQUIRE(profiles[i].times.size() == synth.profiles[i].times.size());
    for (std::size_t r = 0; r < profiles[i].times.size(); ++r) {
      CHECK(profiles[i].times[r] == synth.profiles[i].times[r]);
      const double got = profiles[i].watts[static_cast<Eigen::Index>(r)];
      const double want = synth.profiles[i].watts[static_cast<Eigen::Index>(r)];
      if (std::isnan(want)) CHECK(std::isnan(got));
      else CHECK(got == want);
    }
  }
  for (Eigen::Index r = 0; r < feature.values.size(); ++r)
    CHECK(feature.values[r] == synth.feature.values[r]);
}

TEST_CASE("align keeps exactly the instants every series covers") {
  const Timestamp t0 = parse_timestamp("2019-06-01T09:00:00Z");
  auto at = [&](int steps) { return Timestamp{t0.epoch_s + 900 * steps, 0}; };

  DerProfile a;
  a.id = "a";
  a.times = {at(0), at(1), at(2)};
  a.watts = Eigen::Vector3d(1, 2, 3);
  DerProfile b;
  b.id = "b";
  b.times = {at(1), at(2), at(3)};
  b.watts = Eigen::Vector3d(10, 20, 30);
  FeatureSeries f;
  f.name = "f";
  f.times = {at(0), at(1), at(2), at(3)};
  f.values = Eigen::Vector4d(7, 8, 9, 10);

  const AlignedData data = align({a, b}, f);
  REQUIRE(data.samples() == 2);
  CHECK(data.times[0] == at(1));
  CHECK(data.times[1] == at(2));
  CHECK(data.watts(0, 0) == 2);
  CHECK(data.watts(1, 0) == 3);
  CHECK(data.watts(0, 1) == 10);
  CHECK(data.watts(1, 1) == 20);
  CHECK(data.feature[0] == 8);
  CHECK(data.feature[1] == 9);

  const AlignedData swapped = align({b, a}, f);
  CHECK(swapped.der_ids == std::vector<std::string>{"b", "a"});
  CHECK((swapped.watts.col(0).array() == data.watts.col(1).array()).all());
  CHECK((swapped.watts.col(1).array() == data.watts.col(0).array()).all());
  CHECK((swapped.feature.array() == data.feature.array()).all());

  DerProfile far = a;
  far.id = "far";
  for (Timestamp& t : far.times) t.epoch_s += 86400;
  CHECK_THROWS_AS(align({a, far}, f), std::invalid_argument);
}

TEST_CASE("align treats missing readings as absent instants") {
  const Timestamp t0 = parse_timestamp("2019-06-01T09:00:00Z");
  auto at = [&](int steps) { return Timestamp{t0.epoch_s + 900 * steps, 0}; };
  DerProfile a;
  a.id = "a";
  a.times = {at(0), at(1), at(2)};
  a.watts = Eigen::Vector3d(1, std::nan(""), 3);
  FeatureSeries f;
  f.name = "f";
  f.times = a.times;
  f.values = Eigen::Vector3d(7, 8, 9);
  const AlignedData data = align({a}, f);
  REQUIRE(data.samples() == 2);
  CHECK(data.watts(0, 0) == 1);
  CHECK(data.watts(1, 0) == 3);
}

TEST_CASE("synthesis is deterministic and shaped as requested") {
  SynthSpec spec;
  spec.n_pv = 0;
  spec.n_load = 1;
  spec.n_samples = 10;
  const SynthResult once = synthesize(spec);
  const SynthResult again = synthesize(spec);
  REQUIRE(once.profiles.size() == 1);
  CHECK(once.profiles[0].id == "load01");
  CHECK(once.profiles[0].kind == DerKind::load);
  CHECK(once.feature.values.size() == 10);
  CHECK(once.feature.times[0] == parse_timestamp("2019-06-01T00:00:00+02:00"));
  CHECK(once.feature.times[1].epoch_s - once.feature.times[0].epoch_s == 900);
  for (Eigen::Index i = 0; i < 10; ++i) {
    CHECK(once.profiles[0].watts[i] == again.profiles[0].watts[i]);
    CHECK(once.feature.values[i] == again.feature.values[i]);
  }
  CHECK_NOTHROW(validate_grid(once.feature.times, "synthetic grid"));
}

TEST_CASE("synthetic ids are padded per kind") {
  SynthSpec spec;
  spec.n_pv = 3;
  spec.n_load = 11;
  spec.n_samples = 2;
  const SynthResult synth = synthesize(spec);
  CHECK(synth.profiles[0].id == "pv01");
  CHECK(synth.profiles[2].id == "pv03");
  CHECK(synth.profiles[3].id == "load01");
  CHECK(synth.profiles[13].id == "load11");
}

TEST_CASE("synthetic correlations land near their targets") {
  SynthSpec spec;
  spec.n_pv = 2;
  spec.n_load = 2;
  spec.n_samples = 5000;
  spec.rng_seed = 11;
  spec.pv_corr_range = {-0.9, -0.9};   // degenerate ranges pin the targets
  spec.load_corr_range = {0.5, 0.5};
  const SynthResult synth = synthesize(spec);
  const InstanceStats stats = estimate(align(synth.profiles, synth.feature));
  for (int i = 0; i < 2; ++i) {
    CHECK(stats.feature_corr[i] >= -1.0);
    CHECK(stats.feature_corr[i] <= -0.8);
  }
  for (int i = 2; i < 4; ++i) {
    CHECK(stats.feature_corr[i] >= 0.4);
    CHECK(stats.feature_corr[i] <= 0.6);
  }
}

TEST_CASE("synthetic covariance matrix is positive semidefinite") {
  SynthSpec spec;
  spec.n_pv = 4;
  spec.n_load = 4;
  spec.n_samples = 600;
  const SynthResult synth = synthesize(spec);
  const InstanceStats stats = estimate(align(synth.profiles, synth.feature));
  const Eigen::VectorXd eig =
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(stats.covariance).eigenvalues();
  CHECK(eig.minCoeff() >= -1e-9 * eig.cwiseAbs().maxCoeff());
}

TEST_CASE("synth spec validation") {
  SynthSpec spec;
  spec.n_samples = 1;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.n_pv = -1;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.n_pv = 0;
  spec.n_load = 0;
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.pv_corr_range = {-0.4, -0.3};  // outside the strongly negative band
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.load_corr_range = {0.5, 0.7};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.pv_variance_range = {5.0, 2.0};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
  spec = SynthSpec{};
  spec.load_variance_range = {0.0, 1.0};
  CHECK_THROWS_AS(validate(spec), std::invalid_argument);
}

TEST_SUITE_END();
