#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "dronerf/fft.hpp"
#include "dronerf/sample.hpp"

namespace dronerf {

enum class WindowKind { Hamming };

struct WindowSpec {
  WindowKind kind = WindowKind::Hamming;
  std::size_t length = 0;
};

// w[n] = 0.54 - 0.46 cos(2 pi n / (N - 1)), N >= 2.
std::vector<double> hamming_window(std::size_t n);
std::vector<double> make_window(const WindowSpec& spec);

struct StftConfig {
  std::size_t n_fft = 512;
  std::size_t hop_len = 256;
  WindowSpec window{WindowKind::Hamming, 512};

  // Hamming window of length n_fft, 50% overlap.
  static StftConfig with_default_hop(std::size_t n_fft);
  void validate() const;
};

// Time x frequency grid. Bins are stored in baseband order: bin k sits at
// (k - floor(n_fft/2)) * fs / n_fft, so row 0 is the most negative frequency.
struct StftMatrix {
  std::size_t n_frames = 0;
  std::size_t n_fft = 0;
  std::size_t hop_len = 0;
  std::uint64_t first_sample = 0;  // absolute index of frame 0's first sample
  double sample_rate_hz = 0.0;
  double freq_resolution_hz = 0.0;
  std::vector<double> frame_times_s;
  std::vector<std::complex<double>> bins;  // row-major [frame][bin]

  bool empty() const { return n_frames == 0 || n_fft == 0; }
  std::span<const std::complex<double>> frame(std::size_t m) const {
    return {bins.data() + m * n_fft, n_fft};
  }
  std::complex<double> at(std::size_t m, std::size_t k) const { return bins[m * n_fft + k]; }
  double bin_frequency_hz(std::size_t k) const;
  std::uint64_t frame_start_sample(std::size_t m) const { return first_sample + m * hop_len; }
};

double freq_resolution(double sample_rate_hz, std::size_t n_fft);

// floor((len - n_fft) / hop) + 1 full frames, 0 if len < n_fft.
std::size_t stft_frame_count(std::size_t signal_len, const StftConfig& cfg);

// Windowed N-point transform of one frame that may straddle two buffers
// (head.size() + tail.size() == n_fft). Shared by the batch and streaming
// paths so both produce bit-identical bins.
class FrameTransformer {
 public:
  explicit FrameTransformer(const StftConfig& cfg);

  std::size_t size() const { return window_.size(); }
  void transform(std::span<const Sample> head, std::span<const Sample> tail,
                 std::span<std::complex<double>> out);

 private:
  std::vector<double> window_;
  FftPlan plan_;
};

StftMatrix stft(std::span<const Sample> signal, double sample_rate_hz, const StftConfig& cfg,
                std::uint64_t first_sample = 0);

// Throws InvalidSample on the first NaN/Inf.
void require_finite(std::span<const Sample> signal);

struct PsdEstimate {
  std::vector<double> freqs_hz;
  std::vector<double> power;  // density, power per Hz; sum(power) * bin_width == mean |x|^2
  std::size_t segment_len = 0;
  double overlap_fraction = 0.0;
  double bin_width_hz = 0.0;
  std::size_t n_segments = 0;

  double total_power() const;
};

// Averaged windowed periodograms of overlapping segments, baseband order.
PsdEstimate welch_psd(std::span<const Sample> signal, double sample_rate_hz,
                      std::size_t segment_len = 1024, double overlap_fraction = 0.5,
                      WindowKind window = WindowKind::Hamming);

}  // namespace dronerf
