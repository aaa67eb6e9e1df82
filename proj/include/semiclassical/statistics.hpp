#pragma once

// Small estimators used by the convergence reports.

#include <cstdint>
#include <span>
#include <vector>

#include "semiclassical/grid.hpp"

namespace semiclassical {

/// Least-squares line through (log x, log y). Pairs with a nonpositive or
/// non-finite entry are skipped. residual is the RMS of the fit in log space.
struct SlopeFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;
  std::size_t points = 0;
  bool valid = false;
};
SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y);

/// Number of clusters in 1D data by the gap statistic (optimal 1D k-means
/// for the within-cluster dispersion, uniform reference sets over the data
/// range). Returns 0 for empty input.
std::size_t gap_statistic_clusters(std::vector<double> values, std::size_t k_max = 8, std::size_t references = 50,
                                   std::uint64_t seed = 0);

/// Within-cluster sum of squares of the optimal k-partition of sorted data.
std::vector<double> optimal_kmeans_costs(std::vector<double> values, std::size_t k_max);

/// L1 distance between the empirical distribution of positions and rho over
/// quantile bins of rho's marginals (bins_per_axis per axis, product bins in
/// 2D). Bin probabilities integrate rho exactly over cells centered on the
/// nodes.
double histogram_l1(std::span<const Point> positions, const RealField& rho, std::size_t bins_per_axis);

/// (max - min) / 2 of finite entries: the sup-norm distance modulo a
/// constant. 0 when there are no finite entries.
double minimax_spread(std::span<const double> differences);

double median(std::vector<double> values);

}  // namespace semiclassical
