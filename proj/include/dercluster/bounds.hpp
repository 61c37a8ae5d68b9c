#pragma once

#include <Eigen/Dense>
#include <vector>

#include "dercluster/core.hpp"

namespace dercluster {

// Quantile with linear interpolation between order statistics at rank
// (T-1)*u. Requires at least two samples and u strictly inside (0,1).
double empirical_quantile(const Eigen::Ref<const Eigen::VectorXd>& samples, double u);

// Same, assuming samples are already sorted ascending.
double empirical_quantile_sorted(const Eigen::Ref<const Eigen::VectorXd>& sorted, double u);

// Upper bound on the aggregate's w-quantile as the sum of member quantiles,
// valid whenever w = sum(u_i) + 1 - n is nonnegative; also evaluates the
// Chebyshev-style standard deviation lower bound it implies. Throws on
// w < 0, bad indices, or levels outside (0,1).
BoundResult quantile_sum_bound(const AlignedData& data, const BoundQuery& query);

// (mean - quantile_upper) * sqrt(w / (1 - w)); a valid lower bound on the
// aggregate's standard deviation when quantile_upper is an upper bound on
// the w-quantile. Requires w strictly inside (0,1). A result <= 0 is
// vacuous and is returned as-is, never clamped.
double chebyshev_std_lower(double mean, double quantile_upper, double w);

// Redistributes quantile levels over the members, holding w fixed, to
// shrink the quantile-sum bound: coordinate descent on a fixed grid,
// moving level mass pairwise in steps of grid_step until no move improves.
// First improving move in lowest-index pair order wins, so the result is
// deterministic, and it is never worse than the uniform allocation it
// starts from. Throws when the budget forces some level outside (0,1).
BoundQuery tighten_quantile_sum(const AlignedData& data, const std::vector<int>& members,
                                double w_target, double grid_step = 0.01);

}  // namespace dercluster
