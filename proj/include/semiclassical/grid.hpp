#pragma once

// Uniform periodic grids in one or two dimensions, the real and complex
// field containers defined on them, and spectral differential operators.

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <memory>
#include <span>
#include <vector>

namespace semiclassical {

inline constexpr std::size_t kMaxDim = 2;

/// A position or velocity. Components beyond the grid dimension are zero.
using Point = std::array<double, kMaxDim>;

using Complex = std::complex<double>;

/// Uniform, axis-aligned, periodic grid. Node i on an axis sits at
/// -extent/2 + i * spacing. Nodes are stored row-major: axis 0 is the
/// slowest index. Copies share the (immutable) axis data.
class Grid {
 public:
  Grid(std::size_t dim, std::span<const double> extents, std::span<const std::size_t> points);

  std::size_t dim() const noexcept { return dim_; }
  double extent(std::size_t axis) const { return axes_->at(axis).extent; }
  std::size_t points(std::size_t axis) const { return axes_->at(axis).points; }
  double spacing(std::size_t axis) const { return axes_->at(axis).spacing; }

  /// Total number of nodes.
  std::size_t size() const noexcept { return size_; }
  double cell_volume() const noexcept { return cell_volume_; }

  double coordinate(std::size_t axis, std::size_t i) const {
    const auto& a = axes_->at(axis);
    return -0.5 * a.extent + static_cast<double>(i) * a.spacing;
  }

  /// Lower box corner (the coordinate of node 0) along an axis.
  double lower(std::size_t axis) const { return -0.5 * axes_->at(axis).extent; }

  Point node(std::size_t flat) const;
  std::array<std::size_t, kMaxDim> multi_index(std::size_t flat) const;
  std::size_t flat_index(std::size_t i0, std::size_t i1 = 0) const noexcept {
    return dim_ == 1 ? i0 : i0 * stride0_ + i1;
  }
  /// Row-major stride of axis 0 (1 in one dimension).
  std::size_t stride(std::size_t axis) const noexcept { return axis == 0 ? stride0_ : 1; }

  /// Angular wavenumbers in DFT order, 2*pi/extent * {0, 1, ..., N/2, -N/2+1, ..., -1}.
  std::span<const double> wavenumbers(std::size_t axis) const { return axes_->at(axis).k; }
  /// Same as wavenumbers() with the Nyquist entry set to zero; first
  /// derivatives use this so real fields stay real. Sums to zero.
  std::span<const double> derivative_wavenumbers(std::size_t axis) const {
    return axes_->at(axis).k_derivative;
  }

  /// max |k|^2 over the spectral grid.
  double max_k_squared() const noexcept { return max_k_squared_; }

  std::vector<std::size_t> shape() const;

  friend bool operator==(const Grid& a, const Grid& b);

 private:
  struct Axis {
    double extent = 0;
    std::size_t points = 0;
    double spacing = 0;
    std::vector<double> k;
    std::vector<double> k_derivative;
  };

  std::size_t dim_ = 0;
  std::size_t size_ = 0;
  std::size_t stride0_ = 1;
  double cell_volume_ = 0;
  double max_k_squared_ = 0;
  std::shared_ptr<const std::vector<Axis>> axes_;
};

/// Validating factory: points must be even and >= 8, extents > 0.
Grid make_grid(std::size_t dim, std::span<const double> extents, std::span<const std::size_t> points);

enum class FieldUnits { density, action, energy, velocity, dimensionless };

const char* to_string(FieldUnits units) noexcept;

/// Real scalar per grid node. Density fields must be nonnegative.
struct RealField {
  RealField(Grid grid, std::vector<double> values, FieldUnits units);
  RealField(Grid grid, FieldUnits units);  // zero-filled

  Grid grid;
  std::vector<double> values;
  FieldUnits units;
};

/// Complex amplitude per grid node together with the physical parameters it
/// evolves under.
struct WaveField {
  WaveField(Grid grid, std::vector<Complex> values, double hbar, double mass, double time = 0.0);

  Grid grid;
  std::vector<Complex> values;
  double hbar;
  double mass;
  double time;
};

/// Riemann-sum L2 norm, sqrt(sum |psi|^2 dV).
double l2_norm(const WaveField& psi);
/// The same norm computed from the DFT coefficients (Parseval).
double spectral_l2_norm(const WaveField& psi);
/// Scales psi to unit L2 norm. Throws InvalidArgument on a zero field.
void normalize(WaveField& psi);

/// Sum of values times the cell volume.
double integrate(const RealField& field);

// Spectral operators. All assume the field is periodic on the grid; they are
// exact for band-limited inputs.
std::vector<RealField> gradient(const RealField& field);
RealField laplacian(const RealField& field);

/// Per-axis spectral derivative of complex samples.
std::vector<std::vector<Complex>> gradient(const Grid& grid, std::span<const Complex> values);
std::vector<Complex> laplacian(const Grid& grid, std::span<const Complex> values);

/// In-place unnormalized forward DFT and normalized inverse.
void forward_transform(const Grid& grid, std::span<Complex> values);
void inverse_transform(const Grid& grid, std::span<Complex> values);

/// Evaluates the trigonometric interpolant of real samples at an arbitrary
/// point, together with its Laplacian there.
struct SpectralPointValue {
  double value;
  double laplacian;
};
SpectralPointValue evaluate_spectral(const Grid& grid, std::span<const double> values, const Point& x);

/// Trigonometric interpolant of real samples at many points (one transform).
std::vector<double> resample_spectral(const Grid& grid, std::span<const double> values, std::span<const Point> points);

/// Corner nodes and weights of the cell containing x, for multilinear
/// interpolation. The wrap-around cell between the last and first node is
/// not used: points there count as outside the box.
struct CellWeights {
  std::array<std::size_t, 4> nodes{};
  std::array<double, 4> weights{};
  std::size_t count = 0;
};
bool locate_cell(const Grid& grid, const Point& x, CellWeights& out);

/// Multilinear interpolation of node values at x. Returns false when x lies
/// outside the box or a contributing node is flagged invalid (an empty valid
/// span means every node is valid).
bool interpolate_multilinear(const Grid& grid, std::span<const double> values,
                             std::span<const std::uint8_t> valid, const Point& x, double& out);

}  // namespace semiclassical
