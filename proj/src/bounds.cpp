#include "dercluster/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace dercluster {

namespace {

void check_level(double u) {
  if (!(u > 0.0 && u < 1.0))
    throw std::invalid_argument("quantile level must lie strictly inside (0,1)");
}

Eigen::VectorXd sorted_copy(const Eigen::Ref<const Eigen::VectorXd>& samples) {
  Eigen::VectorXd s = samples;
  std::sort(s.data(), s.data() + s.size());
  return s;
}

std::vector<int> checked_members(const std::vector<int>& members, int n) {
  if (members.empty()) throw std::invalid_argument("bound needs at least one member");
  std::vector<int> m = members;
  std::sort(m.begin(), m.end());
  if (std::adjacent_find(m.begin(), m.end()) != m.end())
    throw std::invalid_argument("duplicate member index in bound query");
  if (m.front() < 0 || m.back() >= n)
    throw std::invalid_argument("member index out of range in bound query");
  return m;
}

}  // namespace

double empirical_quantile_sorted(const Eigen::Ref<const Eigen::VectorXd>& sorted, double u) {
  check_level(u);
  const Eigen::Index t = sorted.size();
  if (t < 2) throw std::invalid_argument("empirical_quantile: need at least 2 samples");
  const double rank = static_cast<double>(t - 1) * u;
  const auto lo = static_cast<Eigen::Index>(rank);
  if (lo + 1 >= t) return sorted[t - 1];
  const double frac = rank - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

double empirical_quantile(const Eigen::Ref<const Eigen::VectorXd>& samples, double u) {
  return empirical_quantile_sorted(sorted_copy(samples), u);
}

BoundResult quantile_sum_bound(const AlignedData& data, const BoundQuery& query) {
  if (query.quantile_levels.size() !=
      static_cast<Eigen::Index>(query.member_indices.size()))
    throw std::invalid_argument("bound query: one quantile level per member required");
  checked_members(query.member_indices, data.size());
  for (Eigen::Index i = 0; i < query.quantile_levels.size(); ++i)
    check_level(query.quantile_levels[i]);

  const double w = query.w();
  if (w < 0.0)
    throw std::invalid_argument("bound query invalid: w = " + std::to_string(w) +
                                " is negative; raise the quantile levels");

  BoundResult out;
  out.query = query;
  out.w = w;
  for (std::size_t i = 0; i < query.member_indices.size(); ++i) {
    const int member = query.member_indices[i];
    out.quantile_sum += empirical_quantile(data.watts.col(member),
                                           query.quantile_levels[static_cast<Eigen::Index>(i)]);
    out.mean_sum += data.watts.col(member).mean();
  }
  out.std_lower_bound =
      w == 0.0 ? 0.0 : (out.mean_sum - out.quantile_sum) * std::sqrt(w / (1.0 - w));
  out.vacuous = out.std_lower_bound <= 0.0;
  return out;
}

double chebyshev_std_lower(double mean, double quantile_upper, double w) {
  if (!(w > 0.0 && w < 1.0))
    throw std::invalid_argument("chebyshev_std_lower: w must lie strictly inside (0,1)");
  return (mean - quantile_upper) * std::sqrt(w / (1.0 - w));
}

BoundQuery tighten_quantile_sum(const AlignedData& data, const std::vector<int>& members,
                                double w_target, double grid_step) {
  const std::vector<int> m = checked_members(members, data.size());
  if (w_target < 0.0)
    throw std::invalid_argument("tighten_quantile_sum: w_target must be nonnegative");
  if (!(grid_step > 0.0 && grid_step < 1.0))
    throw std::invalid_argument("tighten_quantile_sum: grid_step must lie in (0,1)");

  const auto n = static_cast<int>(m.size());
  const double budget = w_target - 1.0 + static_cast<double>(n);  // sum of levels
  const double uniform = budget / static_cast<double>(n);
  if (!(uniform > 0.0 && uniform < 1.0))
    throw std::invalid_argument(
        "tighten_quantile_sum: infeasible, uniform level " + std::to_string(uniform) +
        " falls outside (0,1)");

  std::vector<Eigen::VectorXd> sorted;
  sorted.reserve(m.size());
  for (int member : m) sorted.push_back(sorted_copy(data.watts.col(member)));

  Eigen::VectorXd levels = Eigen::VectorXd::Constant(n, uniform);
  const auto value_at = [&](int i, double u) {
    return empirical_quantile_sorted(sorted[static_cast<std::size_t>(i)], u);
  };

  Eigen::VectorXd member_value(n);
  for (int i = 0; i < n; ++i) member_value[i] = value_at(i, levels[i]);

  // Pairwise mass transfers on the grid; first improving move wins, sweeps
  // repeat until a full pass finds none. Each accepted move strictly lowers
  // the sum, so the walk over the finite lattice terminates.
  const double improvement_eps = 1e-12;
  bool improved = true;
  while (improved) {
    improved = false;
    for (int from = 0; from < n && !improved; ++from) {
      for (int to = 0; to < n && !improved; ++to) {
        if (from == to) continue;
        const double new_from = levels[from] - grid_step;
        const double new_to = levels[to] + grid_step;
        if (!(new_from > 0.0 && new_to < 1.0)) continue;
        const double candidate_from = value_at(from, new_from);
        const double candidate_to = value_at(to, new_to);
        const double delta = candidate_from + candidate_to -
                             member_value[from] - member_value[to];
        const double scale = std::max({1.0, std::abs(member_value[from]),
                                       std::abs(member_value[to])});
        if (delta < -improvement_eps * scale) {
          levels[from] = new_from;
          levels[to] = new_to;
          member_value[from] = candidate_from;
          member_value[to] = candidate_to;
          improved = true;
        }
      }
    }
  }

  BoundQuery out;
  out.member_indices = m;
  out.quantile_levels = levels;
  return out;
}

}  // namespace dercluster
