#include "dercluster/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <unordered_map>
#include <unordered_set>

#include "dercluster/rng.hpp"
#include "dercluster/stats.hpp"
#include "dercluster/text.hpp"

namespace dercluster {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

DerKind kind_from_id(const std::string& id) {
  if (id.size() >= 2 && std::tolower(static_cast<unsigned char>(id[0])) == 'p' &&
      std::tolower(static_cast<unsigned char>(id[1])) == 'v')
    return DerKind::pv_generator;
  return DerKind::load;
}

struct CsvTable {
  std::vector<std::string> columns;       // value column names
  std::vector<Timestamp> times;           // filtered rows
  std::vector<std::vector<double>> cells; // cells[row][col], NaN when empty
};

CsvTable read_table(const std::string& path, const WindowFilter& filter) {
  validate(filter);
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");

  std::string line;
  if (!std::getline(in, line))
    throw std::invalid_argument(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();

  std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 2 || header[0] != "timestamp")
    throw std::invalid_argument(path + ": header must be 'timestamp,<id>,...'");

  CsvTable table;
  table.columns.assign(header.begin() + 1, header.end());
  std::unordered_set<std::string> seen;
  for (const std::string& id : table.columns) {
    if (id.empty())
      throw std::invalid_argument(path + ": empty column name in header");
    if (!seen.insert(id).second)
      throw std::invalid_argument(path + ": duplicate column '" + id + "'");
  }

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size())
      throw std::invalid_argument(path + ": row " + std::to_string(row) + " has " +
                                  std::to_string(cells.size()) + " cells, expected " +
                                  std::to_string(header.size()));
    Timestamp t;
    try {
      t = parse_timestamp(cells[0]);
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ": row " + std::to_string(row) + ": " + e.what());
    }
    std::vector<double> values(table.columns.size(), kNaN);
    for (std::size_t c = 1; c < cells.size(); ++c) {
      if (cells[c].empty()) continue;
      try {
        values[c - 1] = parse_double_strict(cells[c]);
      } catch (const std::invalid_argument&) {
        throw std::invalid_argument(path + ": row " + std::to_string(row) + ", column '" +
                                    header[c] + "': not a number: '" + cells[c] + "'");
      }
    }
    if (!passes(filter, t)) continue;
    table.times.push_back(t);
    table.cells.push_back(std::move(values));
  }
  validate_grid(table.times, path);
  return table;
}

std::string pad_index(int index, int count) {
  int width = 1;
  for (int v = count; v >= 10; v /= 10) ++width;
  width = std::max(width, 2);
  std::string digits = std::to_string(index);
  return std::string(static_cast<std::size_t>(width) - digits.size(), '0') + digits;
}

}  // namespace

bool passes(const WindowFilter& filter, const Timestamp& t) {
  const CivilTime lt = local_time(t);
  if (filter.date_start && lt.date < *filter.date_start) return false;
  if (filter.date_end && *filter.date_end < lt.date) return false;
  return lt.hour >= filter.hour_start && lt.hour < filter.hour_end;
}

void validate(const WindowFilter& filter) {
  if (filter.hour_start < 0 || filter.hour_end > 24 ||
      filter.hour_start >= filter.hour_end)
    throw std::invalid_argument("window filter: need 0 <= hour_start < hour_end <= 24");
  if (filter.date_start && filter.date_end && *filter.date_end < *filter.date_start)
    throw std::invalid_argument("window filter: date_end before date_start");
}

std::vector<DerProfile> load_profiles(const std::string& path, const WindowFilter& filter) {
  CsvTable table = read_table(path, filter);
  std::vector<DerProfile> out;
  out.reserve(table.columns.size());
  for (std::size_t c = 0; c < table.columns.size(); ++c) {
    DerProfile p;
    p.id = table.columns[c];
    p.kind = kind_from_id(p.id);
    p.times = table.times;
    p.watts.resize(static_cast<Eigen::Index>(table.times.size()));
    for (std::size_t r = 0; r < table.times.size(); ++r)
      p.watts[static_cast<Eigen::Index>(r)] = table.cells[r][c];
    out.push_back(std::move(p));
  }
  return out;
}

FeatureSeries load_feature(const std::string& path, const WindowFilter& filter) {
  CsvTable table = read_table(path, filter);
  if (table.columns.size() != 1)
    throw std::invalid_argument(path + ": feature file must have exactly one value column");
  FeatureSeries f;
  f.name = table.columns[0];
  f.times = table.times;
  f.values.resize(static_cast<Eigen::Index>(table.times.size()));
  for (std::size_t r = 0; r < table.times.size(); ++r)
    f.values[static_cast<Eigen::Index>(r)] = table.cells[r][0];
  return f;
}

void write_profiles(const std::string& path, const std::vector<DerProfile>& profiles) {
  if (profiles.empty()) throw std::invalid_argument("write_profiles: nothing to write");
  for (const DerProfile& p : profiles)
    if (p.times.size() != profiles.front().times.size() ||
        static_cast<std::size_t>(p.watts.size()) != p.times.size())
      throw std::invalid_argument("write_profiles: profiles must share one grid");
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "timestamp";
  for (const DerProfile& p : profiles) out << ',' << p.id;
  out << '\n';
  for (std::size_t r = 0; r < profiles.front().times.size(); ++r) {
    out << format_timestamp(profiles.front().times[r]);
    for (const DerProfile& p : profiles) {
      out << ',';
      const double v = p.watts[static_cast<Eigen::Index>(r)];
      if (!std::isnan(v)) out << format_double(v);
    }
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

void write_feature(const std::string& path, const FeatureSeries& feature) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write '" + path + "'");
  out << "timestamp," << feature.name << '\n';
  for (std::size_t r = 0; r < feature.times.size(); ++r) {
    out << format_timestamp(feature.times[r]) << ',';
    const double v = feature.values[static_cast<Eigen::Index>(r)];
    if (!std::isnan(v)) out << format_double(v);
    out << '\n';
  }
  if (!out) throw std::runtime_error("failed writing '" + path + "'");
}

AlignedData align(const std::vector<DerProfile>& profiles, const FeatureSeries& feature) {
  if (profiles.empty()) throw std::invalid_argument("align: no profiles");
  std::unordered_set<std::string> ids;
  for (const DerProfile& p : profiles) {
    if (!ids.insert(p.id).second)
      throw std::invalid_argument("align: duplicate profile id '" + p.id + "'");
    if (static_cast<std::size_t>(p.watts.size()) != p.times.size())
      throw std::invalid_argument("align: profile '" + p.id + "' times/values length mismatch");
    validate_grid(p.times, "profile '" + p.id + "'");
  }
  if (static_cast<std::size_t>(feature.values.size()) != feature.times.size())
    throw std::invalid_argument("align: feature times/values length mismatch");
  validate_grid(feature.times, "feature '" + feature.name + "'");

  // Count, per instant, how many series have a reading there.
  std::unordered_map<std::int64_t, std::size_t> present;
  present.reserve(feature.times.size() * 2);
  for (std::size_t r = 0; r < feature.times.size(); ++r)
    if (!std::isnan(feature.values[static_cast<Eigen::Index>(r)]))
      ++present[feature.times[r].epoch_s];
  for (const DerProfile& p : profiles)
    for (std::size_t r = 0; r < p.times.size(); ++r)
      if (!std::isnan(p.watts[static_cast<Eigen::Index>(r)]))
        ++present[p.times[r].epoch_s];

  std::vector<std::int64_t> common;
  for (const auto& [epoch, count] : present)
    if (count == profiles.size() + 1) common.push_back(epoch);
  if (common.empty())
    throw std::invalid_argument("align: no timestamp is covered by every series");
  std::sort(common.begin(), common.end());
  std::unordered_map<std::int64_t, std::size_t> row_of;
  row_of.reserve(common.size() * 2);
  for (std::size_t r = 0; r < common.size(); ++r) row_of[common[r]] = r;

  AlignedData out;
  const auto t = static_cast<Eigen::Index>(common.size());
  out.watts.resize(t, static_cast<Eigen::Index>(profiles.size()));
  out.feature.resize(t);
  out.times.resize(common.size());
  out.feature_name = feature.name;
  for (std::size_t r = 0; r < feature.times.size(); ++r) {
    const auto it = row_of.find(feature.times[r].epoch_s);
    if (it == row_of.end()) continue;
    out.feature[static_cast<Eigen::Index>(it->second)] =
        feature.values[static_cast<Eigen::Index>(r)];
  }
  for (std::size_t c = 0; c < profiles.size(); ++c) {
    const DerProfile& p = profiles[c];
    out.der_ids.push_back(p.id);
    out.kinds.push_back(p.kind);
    for (std::size_t r = 0; r < p.times.size(); ++r) {
      const auto it = row_of.find(p.times[r].epoch_s);
      if (it == row_of.end()) continue;
      out.watts(static_cast<Eigen::Index>(it->second), static_cast<Eigen::Index>(c)) =
          p.watts[static_cast<Eigen::Index>(r)];
      if (c == 0) out.times[it->second] = p.times[r];
    }
  }
  return out;
}

void validate(const SynthSpec& spec) {
  if (spec.n_pv < 0 || spec.n_load < 0)
    throw std::invalid_argument("synth spec: negative counts");
  if (spec.n_pv + spec.n_load < 1)
    throw std::invalid_argument("synth spec: nothing to synthesize");
  if (spec.n_samples < 2)
    throw std::invalid_argument("synth spec: need at least 2 samples");
  const auto ordered = [](const std::array<double, 2>& r) { return r[0] <= r[1]; };
  if (!ordered(spec.pv_corr_range) || !ordered(spec.load_corr_range) ||
      !ordered(spec.pv_variance_range) || !ordered(spec.load_variance_range))
    throw std::invalid_argument("synth spec: range bounds out of order");
  if (spec.pv_corr_range[0] < -1.0 || spec.pv_corr_range[1] > -0.5)
    throw std::invalid_argument("synth spec: pv_corr_range must sit inside [-1, -0.5]");
  if (spec.load_corr_range[0] < -0.5 || spec.load_corr_range[1] > 0.6)
    throw std::invalid_argument("synth spec: load_corr_range must sit inside [-0.5, 0.6]");
  if (spec.pv_variance_range[0] <= 0.0 || spec.load_variance_range[0] <= 0.0)
    throw std::invalid_argument("synth spec: variance ranges must be positive");
}

SynthResult synthesize(const SynthSpec& spec) {
  validate(spec);
  const int n = spec.n_pv + spec.n_load;
  const Eigen::Index t = spec.n_samples;

  SynthResult out;
  out.feature.name = "feature";
  out.feature.times.reserve(static_cast<std::size_t>(t));
  const Timestamp start = parse_timestamp("2019-06-01T00:00:00+02:00");
  for (Eigen::Index k = 0; k < t; ++k)
    out.feature.times.push_back(Timestamp{start.epoch_s + 900 * k, start.offset_min});

  // Common factor: one daily sine period every 96 quarter-hour steps.
  Rng feature_rng(derive_seed(spec.rng_seed, 0));
  out.feature.values.resize(t);
  for (Eigen::Index k = 0; k < t; ++k)
    out.feature.values[k] = 400.0 +
                            300.0 * std::sin(6.283185307179586477 * static_cast<double>(k) / 96.0) +
                            120.0 * feature_rng.normal();

  const double feature_mean = sample_mean(out.feature.values);
  const double feature_sd = std::sqrt(sample_variance(out.feature.values));

  out.profiles.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const bool pv = i < spec.n_pv;
    DerProfile p;
    p.kind = pv ? DerKind::pv_generator : DerKind::load;
    p.id = pv ? "pv" + pad_index(i + 1, spec.n_pv)
              : "load" + pad_index(i - spec.n_pv + 1, spec.n_load);
    p.times = out.feature.times;

    Rng rng(derive_seed(spec.rng_seed, static_cast<std::uint64_t>(i) + 1));
    const auto& corr_range = pv ? spec.pv_corr_range : spec.load_corr_range;
    const auto& var_range = pv ? spec.pv_variance_range : spec.load_variance_range;
    const double target_corr = rng.uniform(corr_range[0], corr_range[1]);
    const double target_var = rng.uniform(var_range[0], var_range[1]);

    const double coeff = target_corr * std::sqrt(target_var) / feature_sd;
    const double noise_sd = std::sqrt(std::max(0.0, target_var * (1.0 - target_corr * target_corr)));
    const double mean = (pv ? -1.5 : 1.5) * std::sqrt(target_var);

    p.watts.resize(t);
    for (Eigen::Index k = 0; k < t; ++k)
      p.watts[k] = mean + coeff * (out.feature.values[k] - feature_mean) +
                   noise_sd * rng.normal();
    out.profiles.push_back(std::move(p));
  }
  return out;
}

}  // namespace dercluster
