#pragma once

// FFTW plan wrapper. Plans are in-place, created with FFTW_ESTIMATE |
// FFTW_UNALIGNED so the same transform gives bit-identical results for any
// buffer address. One cache per thread; plan creation is serialized because
// the FFTW planner is not thread-safe.

#include <span>

#include <fftw3.h>

#include "semiclassical/grid.hpp"

namespace semiclassical::detail {

class FftPlan {
 public:
  explicit FftPlan(const std::vector<std::size_t>& shape);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;

  void forward(std::span<Complex> data) const;
  /// Normalized: backward(forward(x)) == x.
  void backward(std::span<Complex> data) const;

 private:
  std::size_t size_ = 0;
  fftw_plan forward_ = nullptr;
  fftw_plan backward_ = nullptr;
};

const FftPlan& plan_for(const Grid& grid);

}  // namespace semiclassical::detail
