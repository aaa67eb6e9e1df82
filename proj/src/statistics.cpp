#include "semiclassical/statistics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include "semiclassical/errors.hpp"

namespace semiclassical {

SlopeFit fit_loglog(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw InvalidArgument("fit_loglog needs equally long inputs");
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (x[i] > 0 && y[i] > 0 && std::isfinite(x[i]) && std::isfinite(y[i])) {
      lx.push_back(std::log(x[i]));
      ly.push_back(std::log(y[i]));
    }
  }
  SlopeFit out;
  out.points = lx.size();
  if (lx.size() < 2) return out;
  const double n = static_cast<double>(lx.size());
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    mx += lx[i];
    my += ly[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sxx += (lx[i] - mx) * (lx[i] - mx);
    sxy += (lx[i] - mx) * (ly[i] - my);
  }
  if (!(sxx > 0)) return out;
  out.slope = sxy / sxx;
  out.intercept = my - out.slope * mx;
  double ss = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (out.intercept + out.slope * lx[i]);
    ss += r * r;
  }
  out.residual = std::sqrt(ss / n);
  out.valid = true;
  return out;
}

std::vector<double> optimal_kmeans_costs(std::vector<double> v, std::size_t k_max) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  std::vector<double> costs;
  if (n == 0) return costs;
  std::vector<double> s1(n + 1, 0.0), s2(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    s1[i + 1] = s1[i] + v[i];
    s2[i + 1] = s2[i] + v[i] * v[i];
  }
  // SSE of v[i..j) about its mean.
  auto sse = [&](std::size_t i, std::size_t j) {
    const double m = static_cast<double>(j - i);
    const double s = s1[j] - s1[i];
    return std::max(0.0, (s2[j] - s2[i]) - s * s / m);
  };
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> prev(n + 1, inf), cur(n + 1, inf);
  for (std::size_t j = 1; j <= n; ++j) prev[j] = sse(0, j);
  costs.push_back(prev[n]);
  for (std::size_t k = 2; k <= std::min(k_max, n); ++k) {
    std::fill(cur.begin(), cur.end(), inf);
    for (std::size_t j = k; j <= n; ++j) {
      for (std::size_t i = k - 1; i < j; ++i) cur[j] = std::min(cur[j], prev[i] + sse(i, j));
    }
    std::swap(prev, cur);
    costs.push_back(prev[n]);
  }
  return costs;
}

std::size_t gap_statistic_clusters(std::vector<double> values, std::size_t k_max, std::size_t references,
                                   std::uint64_t seed) {
  if (values.empty()) return 0;
  if (values.size() < 3) return 1;
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it, hi = *hi_it;
  if (!(hi > lo)) return 1;
  k_max = std::min(k_max, values.size() - 1);
  // Dispersion floor keeps log finite when clusters collapse to points.
  const double eps = 1e-12 * (hi - lo) * (hi - lo) * static_cast<double>(values.size());
  const auto w = optimal_kmeans_costs(values, k_max + 1);
  std::mt19937_64 rng(seed);
  std::vector<std::vector<double>> ref_logs(w.size());
  std::vector<double> sample(values.size());
  for (std::size_t b = 0; b < references; ++b) {
    for (auto& s : sample) s = lo + (hi - lo) * (static_cast<double>(rng() >> 11) * 0x1.0p-53);
    const auto wr = optimal_kmeans_costs(sample, k_max + 1);
    for (std::size_t k = 0; k < w.size(); ++k) ref_logs[k].push_back(std::log(wr[k] + eps));
  }
  std::vector<double> gap(w.size()), sd(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) {
    double m = 0;
    for (double l : ref_logs[k]) m += l;
    m /= static_cast<double>(references);
    double var = 0;
    for (double l : ref_logs[k]) var += (l - m) * (l - m);
    var /= static_cast<double>(references);
    gap[k] = m - std::log(w[k] + eps);
    sd[k] = std::sqrt(var) * std::sqrt(1.0 + 1.0 / static_cast<double>(references));
  }
  for (std::size_t k = 0; k + 1 < w.size(); ++k) {
    if (gap[k] >= gap[k + 1] - sd[k + 1]) return k + 1;
  }
  return w.size();
}

namespace {

// Mass of rho left of coordinate X along one axis of a marginal, treating
// node i as the cell [x_i - dx/2, x_i + dx/2).
struct Cumulative {
  double lower;  // left edge of cell 0
  double dx;
  std::vector<double> c;  // c[i] = mass of cells < i

  double at(double x) const {
    const double s = (x - lower) / dx;
    if (s <= 0) return 0.0;
    const double n = static_cast<double>(c.size() - 1);
    if (s >= n) return c.back();
    const auto i = static_cast<std::size_t>(s);
    const double f = s - static_cast<double>(i);
    return c[i] + f * (c[i + 1] - c[i]);
  }

  double quantile(double q) const {
    const double target = q * c.back();
    auto it = std::upper_bound(c.begin(), c.end(), target);
    std::size_t i = static_cast<std::size_t>(std::distance(c.begin(), it));
    i = std::clamp<std::size_t>(i, 1, c.size() - 1) - 1;
    const double m = c[i + 1] - c[i];
    const double f = m > 0 ? (target - c[i]) / m : 0.0;
    return lower + (static_cast<double>(i) + f) * dx;
  }
};

Cumulative marginal(const RealField& rho, std::size_t axis) {
  const Grid& g = rho.grid;
  std::vector<double> m(g.points(axis), 0.0);
  for (std::size_t f = 0; f < g.size(); ++f) m[g.multi_index(f)[axis]] += rho.values[f];
  Cumulative out{g.lower(axis) - 0.5 * g.spacing(axis), g.spacing(axis), std::vector<double>(m.size() + 1, 0.0)};
  for (std::size_t i = 0; i < m.size(); ++i) out.c[i + 1] = out.c[i] + m[i];
  return out;
}

}  // namespace

double histogram_l1(std::span<const Point> positions, const RealField& rho, std::size_t bins) {
  if (bins < 1) throw InvalidArgument("histogram needs at least one bin per axis");
  if (positions.empty()) throw InvalidArgument("histogram needs positions");
  const Grid& g = rho.grid;
  const std::size_t dim = g.dim();
  std::array<Cumulative, kMaxDim> marg;
  std::array<std::vector<double>, kMaxDim> edges;  // interior edges
  for (std::size_t a = 0; a < dim; ++a) {
    marg[a] = marginal(rho, a);
    for (std::size_t b = 1; b < bins; ++b) edges[a].push_back(marg[a].quantile(static_cast<double>(b) / bins));
  }
  auto bin_of = [&](double x, std::size_t a) {
    return static_cast<std::size_t>(std::upper_bound(edges[a].begin(), edges[a].end(), x) - edges[a].begin());
  };
  const std::size_t total_bins = dim == 1 ? bins : bins * bins;
  std::vector<double> expected(total_bins, 0.0), observed(total_bins, 0.0);

  if (dim == 1) {
    const double mass = marg[0].c.back();
    double prev = 0.0;
    for (std::size_t b = 0; b < bins; ++b) {
      const double next = b + 1 < bins ? marg[0].at(edges[0][b]) : mass;
      expected[b] = (next - prev) / mass;
      prev = next;
    }
  } else {
    // 2D cumulative table over cells, bilinear between cell corners.
    const std::size_t n0 = g.points(0), n1 = g.points(1);
    std::vector<double> c((n0 + 1) * (n1 + 1), 0.0);
    auto C = [&](std::size_t i, std::size_t j) -> double& { return c[i * (n1 + 1) + j]; };
    for (std::size_t i = 0; i < n0; ++i) {
      for (std::size_t j = 0; j < n1; ++j) {
        C(i + 1, j + 1) = C(i, j + 1) + C(i + 1, j) - C(i, j) + rho.values[g.flat_index(i, j)];
      }
    }
    auto cum = [&](double x, double y) {
      const double sx = std::clamp((x - marg[0].lower) / marg[0].dx, 0.0, static_cast<double>(n0));
      const double sy = std::clamp((y - marg[1].lower) / marg[1].dx, 0.0, static_cast<double>(n1));
      const auto i = std::min(static_cast<std::size_t>(sx), n0 - 1);
      const auto j = std::min(static_cast<std::size_t>(sy), n1 - 1);
      const double fx = sx - static_cast<double>(i), fy = sy - static_cast<double>(j);
      return (1 - fx) * (1 - fy) * C(i, j) + fx * (1 - fy) * C(i + 1, j) + (1 - fx) * fy * C(i, j + 1) +
             fx * fy * C(i + 1, j + 1);
    };
    const double big = std::numeric_limits<double>::infinity();
    std::vector<double> ex{-big}, ey{-big};
    ex.insert(ex.end(), edges[0].begin(), edges[0].end());
    ey.insert(ey.end(), edges[1].begin(), edges[1].end());
    ex.push_back(big);
    ey.push_back(big);
    const double mass = C(n0, n1);
    for (std::size_t bx = 0; bx < bins; ++bx) {
      for (std::size_t by = 0; by < bins; ++by) {
        const double m = cum(ex[bx + 1], ey[by + 1]) - cum(ex[bx], ey[by + 1]) - cum(ex[bx + 1], ey[by]) +
                         cum(ex[bx], ey[by]);
        expected[bx * bins + by] = m / mass;
      }
    }
  }
  for (const Point& p : positions) {
    const std::size_t b = dim == 1 ? bin_of(p[0], 0) : bin_of(p[0], 0) * bins + bin_of(p[1], 1);
    observed[b] += 1.0;
  }
  double l1 = 0;
  const double n = static_cast<double>(positions.size());
  for (std::size_t b = 0; b < total_bins; ++b) l1 += std::abs(observed[b] / n - expected[b]);
  return l1;
}

double minimax_spread(std::span<const double> d) {
  double lo = std::numeric_limits<double>::infinity(), hi = -lo;
  for (double v : d) {
    if (!std::isfinite(v)) continue;
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  return hi >= lo ? 0.5 * (hi - lo) : 0.0;
}

double median(std::vector<double> v) {
  if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
  const std::size_t mid = v.size() / 2;
  std::nth_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid), v.end());
  const double hi = v[mid];
  if (v.size() % 2 == 1) return hi;
  const double lo = *std::max_element(v.begin(), v.begin() + static_cast<std::ptrdiff_t>(mid));
  return 0.5 * (lo + hi);
}

}  // namespace semiclassical
