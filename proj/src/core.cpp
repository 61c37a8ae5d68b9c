#include "dercluster/core.hpp"

#include <map>
#include <numeric>
#include <stdexcept>

namespace dercluster {

std::string to_string(DerKind k) {
  return k == DerKind::pv_generator ? "pv_generator" : "load";
}

void validate_grid(const std::vector<Timestamp>& times, const std::string& what) {
  std::int64_t base = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const std::int64_t gap = times[i].epoch_s - times[i - 1].epoch_s;
    if (gap <= 0)
      throw std::invalid_argument(what + ": timestamps not strictly increasing at row " +
                                  std::to_string(i));
    base = base == 0 ? gap : std::gcd(base, gap);
  }
  if (base == 0) return;
  std::int64_t smallest = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    const std::int64_t gap = times[i].epoch_s - times[i - 1].epoch_s;
    if (smallest == 0 || gap < smallest) smallest = gap;
  }
  if (smallest != base)
    throw std::invalid_argument(what + ": timestamps do not sit on one uniform period");
}

int ClusterAssignment::clusters_used() const {
  int used = 0;
  for (int c : cluster_of) used = std::max(used, c + 1);
  return used;
}

ClusterAssignment canonicalize(const std::vector<int>& raw, int num_clusters_max) {
  if (num_clusters_max < 1)
    throw std::invalid_argument("canonicalize: need at least one cluster");
  std::vector<int> remap(static_cast<std::size_t>(num_clusters_max), -1);
  ClusterAssignment out;
  out.num_clusters_max = num_clusters_max;
  out.cluster_of.reserve(raw.size());
  int next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    const int label = raw[i];
    if (label < 0 || label >= num_clusters_max)
      throw std::invalid_argument("canonicalize: label " + std::to_string(label) +
                                  " at position " + std::to_string(i) +
                                  " outside [0, " + std::to_string(num_clusters_max) + ")");
    if (remap[label] < 0) remap[label] = next++;
    out.cluster_of.push_back(remap[label]);
  }
  return out;
}

bool is_canonical(const std::vector<int>& labels) {
  int next = 0;
  for (int label : labels) {
    if (label > next) return false;
    if (label == next) ++next;
  }
  return true;
}

namespace {

// First-use relabeling without a label-range restriction.
std::vector<int> first_use_form(const std::vector<int>& labels) {
  std::vector<int> out(labels.size());
  std::map<int, int> seen;
  for (std::size_t i = 0; i < labels.size(); ++i)
    out[i] = seen.emplace(labels[i], static_cast<int>(seen.size())).first->second;
  return out;
}

}  // namespace

bool same_partition(const std::vector<int>& a, const std::vector<int>& b) {
  return a.size() == b.size() && first_use_form(a) == first_use_form(b);
}

std::string to_string(Model m) {
  switch (m) {
    case Model::proxy: return "proxy";
    case Model::covariance: return "covariance";
    case Model::brute_force: return "brute_force";
    case Model::monte_carlo_best: return "monte_carlo_best";
  }
  return "unknown";
}

Model model_from_string(const std::string& name) {
  if (name == "proxy") return Model::proxy;
  if (name == "covariance") return Model::covariance;
  if (name == "brute_force" || name == "brute") return Model::brute_force;
  if (name == "monte_carlo_best" || name == "mc") return Model::monte_carlo_best;
  throw std::invalid_argument("unknown model '" + name + "'");
}

std::int64_t milp_binaries_per_cluster(Model m, int n) {
  if (n < 0 || n > 62)
    throw std::invalid_argument("milp_binaries_per_cluster: n out of range");
  const std::int64_t nn = n;
  switch (m) {
    case Model::proxy: return nn;
    case Model::covariance: return nn * (nn - 1) / 2;
    case Model::brute_force: return (std::int64_t{1} << n) - 1;
    case Model::monte_carlo_best: return 0;
  }
  return 0;
}

}  // namespace dercluster
