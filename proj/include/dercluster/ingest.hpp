#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dercluster/core.hpp"

namespace dercluster {

// Keeps rows whose local calendar date lies in [date_start, date_end]
// (either side optional) and whose local hour lies in [hour_start, hour_end).
// "Local" means the fixed offset each timestamp was written in.
struct WindowFilter {
  std::optional<CivilDate> date_start;
  std::optional<CivilDate> date_end;
  int hour_start = 0;
  int hour_end = 24;
};

bool passes(const WindowFilter& filter, const Timestamp& t);
void validate(const WindowFilter& filter);

// Wide CSV "timestamp,<id>,<id>,..." with strict ISO-8601 timestamps and
// decimal watt readings; an empty cell is a missing reading. Column ids
// starting with "pv" (case-insensitive) are taken as PV generators, all
// others as loads. Throws std::invalid_argument on malformed timestamps,
// duplicate column names, or non-numeric cells; std::runtime_error on I/O
// failure.
std::vector<DerProfile> load_profiles(const std::string& path,
                                      const WindowFilter& filter = {});

// CSV "timestamp,value" with the same conventions; the series name is the
// value column's header.
FeatureSeries load_feature(const std::string& path, const WindowFilter& filter = {});

// Inverse writers; values are printed shortest-round-trip, so readings
// survive a write/load cycle exactly. All profiles must share one grid.
void write_profiles(const std::string& path, const std::vector<DerProfile>& profiles);
void write_feature(const std::string& path, const FeatureSeries& feature);

// Restricts everything to the timestamps where every profile and the feature
// all have readings. Column order follows the input order. Throws when the
// intersection is empty.
AlignedData align(const std::vector<DerProfile>& profiles, const FeatureSeries& feature);

// Deterministic synthetic fleet: a common feature process (daily sinusoid
// plus noise) and per-DER series coeff * feature + noise, with coefficients
// solved against the realized feature moments so each series hits its target
// variance and feature correlation. PV correlations are negative (generation
// is negative in the sign convention); loads sit in a weak band.
struct SynthSpec {
  int n_pv = 8;
  int n_load = 8;
  int n_samples = 5000;
  std::array<double, 2> pv_corr_range{-0.95, -0.7};
  std::array<double, 2> load_corr_range{-0.3, 0.5};
  std::array<double, 2> pv_variance_range{2.0e6, 8.0e6};
  std::array<double, 2> load_variance_range{1.0e5, 2.0e6};
  std::uint64_t rng_seed = 1;
};

void validate(const SynthSpec& spec);

struct SynthResult {
  std::vector<DerProfile> profiles;
  FeatureSeries feature;
};

SynthResult synthesize(const SynthSpec& spec);

}  // namespace dercluster
