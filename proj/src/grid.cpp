#include "semiclassical/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "semiclassical/errors.hpp"

namespace semiclassical {

Grid::Grid(std::size_t dim, std::span<const double> extents, std::span<const std::size_t> points) {
  if (dim < 1 || dim > kMaxDim) throw InvalidArgument("grid dimension must be 1 or 2");
  if (extents.size() != dim || points.size() != dim) {
    throw InvalidArgument("grid needs one extent and one point count per axis");
  }
  auto axes = std::make_shared<std::vector<Axis>>();
  dim_ = dim;
  size_ = 1;
  cell_volume_ = 1;
  for (std::size_t a = 0; a < dim; ++a) {
    if (!(extents[a] > 0) || !std::isfinite(extents[a])) {
      throw InvalidArgument("grid extent must be positive on axis " + std::to_string(a));
    }
    if (points[a] < 8 || points[a] % 2 != 0) {
      throw InvalidArgument("grid point count must be even and >= 8 on axis " + std::to_string(a));
    }
    Axis ax;
    ax.extent = extents[a];
    ax.points = points[a];
    ax.spacing = extents[a] / static_cast<double>(points[a]);
    const double dk = 2.0 * std::numbers::pi / extents[a];
    const auto n = static_cast<std::ptrdiff_t>(points[a]);
    ax.k.resize(points[a]);
    ax.k_derivative.resize(points[a]);
    for (std::ptrdiff_t i = 0; i < n; ++i) {
      const std::ptrdiff_t m = i <= n / 2 ? i : i - n;
      ax.k[i] = dk * static_cast<double>(m);
      ax.k_derivative[i] = (i == n / 2) ? 0.0 : ax.k[i];
    }
    const double kmax = dk * static_cast<double>(n / 2);
    max_k_squared_ += kmax * kmax;
    size_ *= points[a];
    cell_volume_ *= ax.spacing;
    axes->push_back(std::move(ax));
  }
  stride0_ = dim == 2 ? (*axes)[1].points : 1;
  axes_ = std::move(axes);
}

Grid make_grid(std::size_t dim, std::span<const double> extents, std::span<const std::size_t> points) {
  return Grid(dim, extents, points);
}

Point Grid::node(std::size_t flat) const {
  const auto idx = multi_index(flat);
  Point p{0.0, 0.0};
  for (std::size_t a = 0; a < dim_; ++a) p[a] = coordinate(a, idx[a]);
  return p;
}

std::array<std::size_t, kMaxDim> Grid::multi_index(std::size_t flat) const {
  if (dim_ == 1) return {flat, 0};
  return {flat / stride0_, flat % stride0_};
}

std::vector<std::size_t> Grid::shape() const {
  std::vector<std::size_t> s;
  for (const auto& a : *axes_) s.push_back(a.points);
  return s;
}

bool operator==(const Grid& a, const Grid& b) {
  if (a.dim_ != b.dim_) return false;
  if (a.axes_ == b.axes_) return true;
  for (std::size_t i = 0; i < a.dim_; ++i) {
    if (a.points(i) != b.points(i) || a.extent(i) != b.extent(i)) return false;
  }
  return true;
}

const char* to_string(FieldUnits units) noexcept {
  switch (units) {
    case FieldUnits::density: return "density";
    case FieldUnits::action: return "action";
    case FieldUnits::energy: return "energy";
    case FieldUnits::velocity: return "velocity";
    case FieldUnits::dimensionless: return "dimensionless";
  }
  return "unknown";
}

RealField::RealField(Grid g, std::vector<double> v, FieldUnits u)
    : grid(std::move(g)), values(std::move(v)), units(u) {
  if (values.size() != grid.size()) throw InvalidArgument("field size does not match grid");
  if (units == FieldUnits::density) {
    for (double x : values) {
      if (x < 0) throw InvalidArgument("density field has a negative value");
    }
  }
}

RealField::RealField(Grid g, FieldUnits u) : grid(std::move(g)), values(grid.size(), 0.0), units(u) {}

WaveField::WaveField(Grid g, std::vector<Complex> v, double h, double m, double t)
    : grid(std::move(g)), values(std::move(v)), hbar(h), mass(m), time(t) {
  if (values.size() != grid.size()) throw InvalidArgument("wave field size does not match grid");
  if (!(hbar > 0)) throw InvalidArgument("hbar must be positive");
  if (!(mass > 0)) throw InvalidArgument("mass must be positive");
  if (!(time >= 0)) throw InvalidArgument("time must be nonnegative");
}

double l2_norm(const WaveField& psi) {
  double s = 0;
  for (const auto& v : psi.values) s += std::norm(v);
  return std::sqrt(s * psi.grid.cell_volume());
}

double spectral_l2_norm(const WaveField& psi) {
  std::vector<Complex> c = psi.values;
  forward_transform(psi.grid, c);
  double s = 0;
  for (const auto& v : c) s += std::norm(v);
  return std::sqrt(s * psi.grid.cell_volume() / static_cast<double>(psi.grid.size()));
}

void normalize(WaveField& psi) {
  const double n = l2_norm(psi);
  if (!(n > 0) || !std::isfinite(n)) throw InvalidArgument("cannot normalize a zero or non-finite wave field");
  for (auto& v : psi.values) v /= n;
}

double integrate(const RealField& field) {
  double s = 0;
  for (double v : field.values) s += v;
  return s * field.grid.cell_volume();
}

void forward_transform(const Grid& grid, std::span<Complex> values) {
  detail::plan_for(grid).forward(values);
}

void inverse_transform(const Grid& grid, std::span<Complex> values) {
  detail::plan_for(grid).backward(values);
}

namespace {

// Multiplies spectral coefficients by i*k along one axis.
void apply_derivative(const Grid& grid, std::size_t axis, std::span<Complex> spec) {
  const auto k = grid.derivative_wavenumbers(axis);
  const Complex I(0.0, 1.0);
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto idx = grid.multi_index(f);
    spec[f] *= I * k[idx[axis]];
  }
}

void apply_laplacian(const Grid& grid, std::span<Complex> spec) {
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto idx = grid.multi_index(f);
    double k2 = 0;
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const double k = grid.wavenumbers(a)[idx[a]];
      k2 += k * k;
    }
    spec[f] *= -k2;
  }
}

std::vector<Complex> to_complex(std::span<const double> v) {
  return std::vector<Complex>(v.begin(), v.end());
}

std::vector<double> real_part(std::span<const Complex> v) {
  std::vector<double> out(v.size());
  std::transform(v.begin(), v.end(), out.begin(), [](const Complex& c) { return c.real(); });
  return out;
}

}  // namespace

std::vector<std::vector<Complex>> gradient(const Grid& grid, std::span<const Complex> values) {
  std::vector<Complex> spec(values.begin(), values.end());
  forward_transform(grid, spec);
  std::vector<std::vector<Complex>> out;
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    auto d = spec;
    apply_derivative(grid, a, d);
    inverse_transform(grid, d);
    out.push_back(std::move(d));
  }
  return out;
}

std::vector<Complex> laplacian(const Grid& grid, std::span<const Complex> values) {
  std::vector<Complex> spec(values.begin(), values.end());
  forward_transform(grid, spec);
  apply_laplacian(grid, spec);
  inverse_transform(grid, spec);
  return spec;
}

std::vector<RealField> gradient(const RealField& field) {
  const auto c = to_complex(field.values);
  auto g = gradient(field.grid, c);
  std::vector<RealField> out;
  for (auto& comp : g) out.emplace_back(field.grid, real_part(comp), FieldUnits::dimensionless);
  return out;
}

RealField laplacian(const RealField& field) {
  const auto c = to_complex(field.values);
  auto l = laplacian(field.grid, c);
  return RealField(field.grid, real_part(l), FieldUnits::dimensionless);
}

SpectralPointValue evaluate_spectral(const Grid& grid, std::span<const double> values, const Point& x) {
  std::vector<Complex> c = to_complex(values);
  forward_transform(grid, c);
  const double n = static_cast<double>(grid.size());
  std::array<std::vector<Complex>, kMaxDim> phase;
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const auto k = grid.wavenumbers(a);
    const double s = x[a] - grid.lower(a);
    phase[a].resize(k.size());
    for (std::size_t i = 0; i < k.size(); ++i) phase[a][i] = std::polar(1.0, k[i] * s);
  }
  double value = 0;
  double lap = 0;
  for (std::size_t f = 0; f < grid.size(); ++f) {
    const auto idx = grid.multi_index(f);
    Complex e = phase[0][idx[0]];
    double k2 = grid.wavenumbers(0)[idx[0]] * grid.wavenumbers(0)[idx[0]];
    if (grid.dim() == 2) {
      e *= phase[1][idx[1]];
      k2 += grid.wavenumbers(1)[idx[1]] * grid.wavenumbers(1)[idx[1]];
    }
    const double term = (c[f] * e).real();
    value += term;
    lap -= k2 * term;
  }
  return {value / n, lap / n};
}

std::vector<double> resample_spectral(const Grid& grid, std::span<const double> values, std::span<const Point> points) {
  std::vector<Complex> c = to_complex(values);
  forward_transform(grid, c);
  const double n = static_cast<double>(grid.size());
  std::vector<double> out;
  out.reserve(points.size());
  std::array<std::vector<Complex>, kMaxDim> phase;
  for (const Point& x : points) {
    for (std::size_t a = 0; a < grid.dim(); ++a) {
      const auto k = grid.wavenumbers(a);
      const double s = x[a] - grid.lower(a);
      phase[a].resize(k.size());
      for (std::size_t i = 0; i < k.size(); ++i) phase[a][i] = std::polar(1.0, k[i] * s);
    }
    double v = 0;
    if (grid.dim() == 1) {
      for (std::size_t i = 0; i < c.size(); ++i) v += (c[i] * phase[0][i]).real();
    } else {
      const std::size_t n1 = grid.points(1);
      for (std::size_t i = 0; i < grid.points(0); ++i) {
        Complex row(0.0, 0.0);
        for (std::size_t j = 0; j < n1; ++j) row += c[i * n1 + j] * phase[1][j];
        v += (row * phase[0][i]).real();
      }
    }
    out.push_back(v / n);
  }
  return out;
}

bool locate_cell(const Grid& grid, const Point& x, CellWeights& out) {
  std::array<std::size_t, kMaxDim> i0{};
  std::array<double, kMaxDim> frac{};
  for (std::size_t a = 0; a < grid.dim(); ++a) {
    const double s = (x[a] - grid.lower(a)) / grid.spacing(a);
    if (!(s >= 0.0)) return false;
    const double fl = std::floor(s);
    const auto i = static_cast<std::size_t>(fl);
    if (i + 1 >= grid.points(a)) return false;
    i0[a] = i;
    frac[a] = s - fl;
  }
  if (grid.dim() == 1) {
    out.count = 2;
    out.nodes[0] = i0[0];
    out.nodes[1] = i0[0] + 1;
    out.weights[0] = 1.0 - frac[0];
    out.weights[1] = frac[0];
    return true;
  }
  out.count = 4;
  const double fx = frac[0], fy = frac[1];
  out.nodes[0] = grid.flat_index(i0[0], i0[1]);
  out.nodes[1] = grid.flat_index(i0[0] + 1, i0[1]);
  out.nodes[2] = grid.flat_index(i0[0], i0[1] + 1);
  out.nodes[3] = grid.flat_index(i0[0] + 1, i0[1] + 1);
  out.weights[0] = (1 - fx) * (1 - fy);
  out.weights[1] = fx * (1 - fy);
  out.weights[2] = (1 - fx) * fy;
  out.weights[3] = fx * fy;
  return true;
}

bool interpolate_multilinear(const Grid& grid, std::span<const double> values,
                             std::span<const std::uint8_t> valid, const Point& x, double& out) {
  CellWeights cw;
  if (!locate_cell(grid, x, cw)) return false;
  double s = 0;
  for (std::size_t c = 0; c < cw.count; ++c) {
    if (!valid.empty() && !valid[cw.nodes[c]]) return false;
    s += cw.weights[c] * values[cw.nodes[c]];
  }
  out = s;
  return true;
}

}  // namespace semiclassical
