#include "dronerf/fft.hpp"

#include <mutex>
#include <utility>

#include <fftw3.h>

#include "dronerf/error.hpp"

namespace dronerf {

namespace {
// FFTW's planner is not re-entrant; execution on distinct plans is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}
}  // namespace

FftPlan::FftPlan(std::size_t n, FftDirection dir) : n_(n) {
  require(n >= 1, ErrorCode::InvalidArgument, "FFT size must be >= 1");
  std::lock_guard lock(planner_mutex());
  in_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  out_ = reinterpret_cast<std::complex<double>*>(fftw_malloc(sizeof(fftw_complex) * n));
  if (!in_ || !out_) {
    fftw_free(in_);
    fftw_free(out_);
    throw std::bad_alloc();
  }
  plan_ = fftw_plan_dft_1d(static_cast<int>(n), reinterpret_cast<fftw_complex*>(in_),
                           reinterpret_cast<fftw_complex*>(out_),
                           dir == FftDirection::Forward ? FFTW_FORWARD : FFTW_BACKWARD,
                           FFTW_ESTIMATE);
  for (std::size_t i = 0; i < n; ++i) in_[i] = 0.0;
}

FftPlan::~FftPlan() { release(); }

FftPlan::FftPlan(FftPlan&& other) noexcept
    : n_(std::exchange(other.n_, 0)),
      in_(std::exchange(other.in_, nullptr)),
      out_(std::exchange(other.out_, nullptr)),
      plan_(std::exchange(other.plan_, nullptr)) {}

FftPlan& FftPlan::operator=(FftPlan&& other) noexcept {
  if (this != &other) {
    release();
    n_ = std::exchange(other.n_, 0);
    in_ = std::exchange(other.in_, nullptr);
    out_ = std::exchange(other.out_, nullptr);
    plan_ = std::exchange(other.plan_, nullptr);
  }
  return *this;
}

void FftPlan::release() {
  if (!plan_ && !in_ && !out_) return;
  std::lock_guard lock(planner_mutex());
  if (plan_) fftw_destroy_plan(static_cast<fftw_plan>(plan_));
  fftw_free(in_);
  fftw_free(out_);
  plan_ = nullptr;
  in_ = out_ = nullptr;
}

void FftPlan::execute() { fftw_execute(static_cast<fftw_plan>(plan_)); }

}  // namespace dronerf
