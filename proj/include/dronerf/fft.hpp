#pragma once

#include <complex>
#include <cstddef>
#include <span>

namespace dronerf {

enum class FftDirection { Forward, Inverse };

// Owns an FFTW plan together with its aligned input/output buffers. Always
// executing on the same buffers keeps results bit-identical between calls,
// which the streaming/batch spectrogram equivalence relies on.
//
// Unnormalized in both directions: forward(x)[k] = sum_n x[n] e^{-2 pi i k n / N}.
class FftPlan {
 public:
  FftPlan(std::size_t n, FftDirection dir);
  ~FftPlan();
  FftPlan(const FftPlan&) = delete;
  FftPlan& operator=(const FftPlan&) = delete;
  FftPlan(FftPlan&& other) noexcept;
  FftPlan& operator=(FftPlan&& other) noexcept;

  std::size_t size() const { return n_; }
  std::span<std::complex<double>> input() { return {in_, n_}; }
  std::span<const std::complex<double>> output() const { return {out_, n_}; }
  void execute();

 private:
  void release();

  std::size_t n_ = 0;
  std::complex<double>* in_ = nullptr;
  std::complex<double>* out_ = nullptr;
  void* plan_ = nullptr;
};

}  // namespace dronerf
