#pragma once

#include <span>
#include <vector>

namespace mimstd::stats {

double mean(std::span<const double> x);

/// Sample variance with the n - 1 denominator; 0 for fewer than two values.
double sample_variance(std::span<const double> x);

double sample_sd(std::span<const double> x);

/// Quantile by linear interpolation between order statistics (Hyndman-Fan
/// type 7, the R default): with sorted x[0..n-1], h = (n - 1) p, the result
/// is x[floor(h)] + (h - floor(h)) (x[floor(h) + 1] - x[floor(h)]).
double quantile_type7(std::vector<double> x, double p);

/// Same rule on data already sorted ascending.
double quantile_type7_sorted(std::span<const double> sorted, double p);

double normal_quantile(double p);

/// Student-t quantile; an infinite dof gives the normal quantile.
double t_quantile(double p, double dof);

}  // namespace mimstd::stats
