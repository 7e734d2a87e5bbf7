#include "dronerf/dsp.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <string>

#include "dronerf/error.hpp"

namespace dronerf {

std::vector<double> hamming_window(std::size_t n) {
  require(n >= 2, ErrorCode::InvalidArgument, "Hamming window length must be >= 2");
  std::vector<double> w(n);
  const double denom = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / denom);
  }
  // Enforce exact symmetry; cos() rounding can differ by an ulp across halves.
  for (std::size_t i = 0; i < n / 2; ++i) w[n - 1 - i] = w[i];
  return w;
}

std::vector<double> make_window(const WindowSpec& spec) {
  switch (spec.kind) {
    case WindowKind::Hamming: return hamming_window(spec.length);
  }
  fail(ErrorCode::InvalidArgument, "unknown window kind");
}

StftConfig StftConfig::with_default_hop(std::size_t n_fft) {
  StftConfig cfg;
  cfg.n_fft = n_fft;
  cfg.hop_len = n_fft / 2 == 0 ? 1 : n_fft / 2;
  cfg.window = {WindowKind::Hamming, n_fft};
  return cfg;
}

void StftConfig::validate() const {
  require(n_fft >= 2, ErrorCode::InvalidArgument, "n_fft must be >= 2");
  require(window.length == n_fft, ErrorCode::InvalidArgument,
          "window length " + std::to_string(window.length) + " != n_fft " + std::to_string(n_fft));
  require(hop_len >= 1 && hop_len <= n_fft, ErrorCode::InvalidArgument,
          "hop_len must satisfy 1 <= hop <= n_fft");
}

double StftMatrix::bin_frequency_hz(std::size_t k) const {
  return (static_cast<double>(k) - static_cast<double>(n_fft / 2)) * freq_resolution_hz;
}

double freq_resolution(double sample_rate_hz, std::size_t n_fft) {
  require(sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  require(n_fft >= 1, ErrorCode::InvalidArgument, "n_fft must be >= 1");
  return sample_rate_hz / static_cast<double>(n_fft);
}

std::size_t stft_frame_count(std::size_t signal_len, const StftConfig& cfg) {
  if (signal_len < cfg.n_fft) return 0;
  return (signal_len - cfg.n_fft) / cfg.hop_len + 1;
}

void require_finite(std::span<const Sample> signal) {
  for (std::size_t i = 0; i < signal.size(); ++i) {
    if (!std::isfinite(signal[i].real()) || !std::isfinite(signal[i].imag())) {
      fail(ErrorCode::InvalidSample, "non-finite sample at index " + std::to_string(i));
    }
  }
}

FrameTransformer::FrameTransformer(const StftConfig& cfg)
    : window_((cfg.validate(), make_window(cfg.window))),
      plan_(cfg.n_fft, FftDirection::Forward) {}

void FrameTransformer::transform(std::span<const Sample> head, std::span<const Sample> tail,
                                 std::span<std::complex<double>> out) {
  const std::size_t n = window_.size();
  auto in = plan_.input();
  std::size_t i = 0;
  for (const auto& s : head) {
    in[i] = std::complex<double>(s.real(), s.imag()) * window_[i];
    ++i;
  }
  for (const auto& s : tail) {
    in[i] = std::complex<double>(s.real(), s.imag()) * window_[i];
    ++i;
  }
  if (i != n) fail(ErrorCode::InvalidArgument, "frame length does not match n_fft");
  plan_.execute();
  const auto spec = plan_.output();
  // Half-spectrum rotation into baseband order.
  const std::size_t shift = n - n / 2;
  for (std::size_t k = 0; k < n; ++k) out[k] = spec[(k + shift) % n];
}

StftMatrix stft(std::span<const Sample> signal, double sample_rate_hz, const StftConfig& cfg,
                std::uint64_t first_sample) {
  cfg.validate();
  require(sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  if (signal.size() < cfg.n_fft) {
    fail(ErrorCode::InsufficientData, "signal of " + std::to_string(signal.size()) +
                                          " samples is shorter than one frame of " +
                                          std::to_string(cfg.n_fft));
  }
  require_finite(signal);

  StftMatrix m;
  m.n_fft = cfg.n_fft;
  m.hop_len = cfg.hop_len;
  m.first_sample = first_sample;
  m.sample_rate_hz = sample_rate_hz;
  m.freq_resolution_hz = freq_resolution(sample_rate_hz, cfg.n_fft);
  m.n_frames = stft_frame_count(signal.size(), cfg);
  m.bins.resize(m.n_frames * m.n_fft);
  m.frame_times_s.resize(m.n_frames);

  FrameTransformer xf(cfg);
  for (std::size_t f = 0; f < m.n_frames; ++f) {
    const std::size_t start = f * cfg.hop_len;
    xf.transform(signal.subspan(start, cfg.n_fft), {},
                 std::span(m.bins.data() + f * m.n_fft, m.n_fft));
    m.frame_times_s[f] = static_cast<double>(first_sample + start) / sample_rate_hz;
  }
  return m;
}

double PsdEstimate::total_power() const {
  return std::accumulate(power.begin(), power.end(), 0.0) * bin_width_hz;
}

PsdEstimate welch_psd(std::span<const Sample> signal, double sample_rate_hz,
                      std::size_t segment_len, double overlap_fraction, WindowKind window) {
  require(sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  require(segment_len >= 2, ErrorCode::InvalidArgument, "segment_len must be >= 2");
  require(overlap_fraction >= 0.0 && overlap_fraction < 1.0, ErrorCode::InvalidArgument,
          "overlap fraction must lie in [0, 1)");
  if (signal.size() < segment_len) {
    fail(ErrorCode::InsufficientData, "signal of " + std::to_string(signal.size()) +
                                          " samples is shorter than one Welch segment of " +
                                          std::to_string(segment_len));
  }
  require_finite(signal);

  StftConfig cfg;
  cfg.n_fft = segment_len;
  cfg.window = {window, segment_len};
  const auto step = static_cast<std::size_t>(
      std::llround(static_cast<double>(segment_len) * (1.0 - overlap_fraction)));
  cfg.hop_len = std::max<std::size_t>(1, std::min(step, segment_len));

  FrameTransformer xf(cfg);
  const auto w = make_window(cfg.window);
  const double w_energy = std::inner_product(w.begin(), w.end(), w.begin(), 0.0);

  const std::size_t n_seg = stft_frame_count(signal.size(), cfg);
  std::vector<double> acc(segment_len, 0.0);
  std::vector<std::complex<double>> spec(segment_len);
  for (std::size_t s = 0; s < n_seg; ++s) {
    xf.transform(signal.subspan(s * cfg.hop_len, segment_len), {}, spec);
    for (std::size_t k = 0; k < segment_len; ++k) acc[k] += std::norm(spec[k]);
  }

  PsdEstimate psd;
  psd.segment_len = segment_len;
  psd.overlap_fraction = overlap_fraction;
  psd.n_segments = n_seg;
  psd.bin_width_hz = sample_rate_hz / static_cast<double>(segment_len);
  psd.freqs_hz.resize(segment_len);
  psd.power.resize(segment_len);
  const double scale = 1.0 / (static_cast<double>(n_seg) * sample_rate_hz * w_energy);
  for (std::size_t k = 0; k < segment_len; ++k) {
    psd.freqs_hz[k] =
        (static_cast<double>(k) - static_cast<double>(segment_len / 2)) * psd.bin_width_hz;
    psd.power[k] = acc[k] * scale;
  }
  return psd;
}

}  // namespace dronerf
