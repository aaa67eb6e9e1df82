#include "fft.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <stdexcept>

namespace semiclassical::detail {
namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(std::span<Complex> data) {
  return reinterpret_cast<fftw_complex*>(data.data());
}

}  // namespace

FftPlan::FftPlan(const std::vector<std::size_t>& shape) {
  std::vector<int> n(shape.begin(), shape.end());
  size_ = 1;
  for (auto s : shape) size_ *= s;
  std::vector<Complex> scratch(size_);
  auto* buf = reinterpret_cast<fftw_complex*>(scratch.data());
  const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
  std::lock_guard lock(planner_mutex());
  forward_ = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_FORWARD, flags);
  backward_ = fftw_plan_dft(static_cast<int>(n.size()), n.data(), buf, buf, FFTW_BACKWARD, flags);
  if (!forward_ || !backward_) throw std::runtime_error("FFTW plan creation failed");
}

FftPlan::~FftPlan() {
  std::lock_guard lock(planner_mutex());
  if (forward_) fftw_destroy_plan(forward_);
  if (backward_) fftw_destroy_plan(backward_);
}

void FftPlan::forward(std::span<Complex> data) const {
  fftw_execute_dft(forward_, as_fftw(data), as_fftw(data));
}

void FftPlan::backward(std::span<Complex> data) const {
  fftw_execute_dft(backward_, as_fftw(data), as_fftw(data));
  const double scale = 1.0 / static_cast<double>(size_);
  for (auto& v : data) v *= scale;
}

const FftPlan& plan_for(const Grid& grid) {
  thread_local std::map<std::vector<std::size_t>, std::unique_ptr<FftPlan>> cache;
  auto shape = grid.shape();
  auto it = cache.find(shape);
  if (it == cache.end()) {
    it = cache.emplace(shape, std::make_unique<FftPlan>(shape)).first;
  }
  return *it->second;
}

}  // namespace semiclassical::detail
