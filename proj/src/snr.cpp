#include "dronerf/snr.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "dronerf/error.hpp"

namespace dronerf {

namespace {

struct PowerSplit {
  double inside = 0.0;
  std::uint64_t n_inside = 0;
  double outside = 0.0;
  std::uint64_t n_outside = 0;
};

PowerSplit split_power(std::span<const Sample> signal, std::span<const BurstSegment> segments) {
  std::vector<BurstSegment> segs(segments.begin(), segments.end());
  std::sort(segs.begin(), segs.end(),
            [](const auto& a, const auto& b) { return a.start_idx < b.start_idx; });
  PowerSplit ps;
  std::uint64_t cursor = 0;
  auto accumulate = [&](std::uint64_t lo, std::uint64_t hi, double& acc, std::uint64_t& n) {
    for (std::uint64_t i = lo; i < hi; ++i) acc += std::norm(std::complex<double>(signal[i]));
    n += hi - lo;
  };
  for (const auto& s : segs) {
    require(s.start_idx < s.end_idx && s.end_idx <= signal.size(), ErrorCode::InvalidArgument,
            "segment [" + std::to_string(s.start_idx) + ", " + std::to_string(s.end_idx) +
                ") lies outside the signal");
    const std::uint64_t lo = std::max(cursor, s.start_idx);
    if (cursor < s.start_idx) accumulate(cursor, s.start_idx, ps.outside, ps.n_outside);
    if (lo < s.end_idx) accumulate(lo, s.end_idx, ps.inside, ps.n_inside);
    cursor = std::max(cursor, s.end_idx);
  }
  if (cursor < signal.size()) accumulate(cursor, signal.size(), ps.outside, ps.n_outside);
  return ps;
}

}  // namespace

SnrEstimate estimate_snr(std::span<const Sample> signal, std::span<const BurstSegment> segments) {
  require(!segments.empty(), ErrorCode::InvalidArgument, "no signal segment given");
  const PowerSplit ps = split_power(signal, segments);
  if (ps.n_outside == 0) {
    fail(ErrorCode::InsufficientNoise, "no samples outside the signal segments to measure noise");
  }
  SnrEstimate est;
  est.p_signal_plus_noise = ps.inside / static_cast<double>(ps.n_inside);
  est.p_noise = ps.outside / static_cast<double>(ps.n_outside);
  est.valid = est.p_noise > 0.0 && est.p_signal_plus_noise > est.p_noise &&
              std::isfinite(est.p_signal_plus_noise) && std::isfinite(est.p_noise);
  est.snr_db = est.valid
                   ? 10.0 * std::log10((est.p_signal_plus_noise - est.p_noise) / est.p_noise)
                   : std::numeric_limits<double>::quiet_NaN();
  return est;
}

SnrEstimate estimate_snr(std::span<const Sample> signal, const BurstSegment& seg) {
  return estimate_snr(signal, std::span<const BurstSegment>(&seg, 1));
}

double estimate_center_frequency(const PsdEstimate& psd, double search_bw_hz) {
  const std::size_t n = psd.power.size();
  require(n > 0 && psd.freqs_hz.size() == n, ErrorCode::EmptyInput, "empty PSD");
  require(search_bw_hz > 0.0, ErrorCode::InvalidArgument, "search bandwidth must be positive");
  const double df = psd.bin_width_hz;
  const double span = df * static_cast<double>(n);
  if (search_bw_hz > span * (1.0 + 1e-12)) {
    fail(ErrorCode::InvalidArgument, "search bandwidth " + std::to_string(search_bw_hz) +
                                         " Hz exceeds the PSD span " + std::to_string(span) + " Hz");
  }
  const auto width = std::clamp<std::size_t>(
      static_cast<std::size_t>(std::llround(search_bw_hz / df)), 1, n);

  std::vector<double> sums(n - width + 1);
  double acc = 0.0;
  for (std::size_t k = 0; k < width; ++k) acc += psd.power[k];
  sums[0] = acc;
  for (std::size_t i = 1; i < sums.size(); ++i) {
    acc += psd.power[i + width - 1] - psd.power[i - 1];
    sums[i] = acc;
  }
  const auto best = static_cast<std::size_t>(
      std::max_element(sums.begin(), sums.end()) - sums.begin());
  const double tol = 1e-3 * std::abs(sums[best]);
  std::size_t lo = best, hi = best;
  while (lo > 0 && sums[best] - sums[lo - 1] <= tol) --lo;
  while (hi + 1 < sums.size() && sums[best] - sums[hi + 1] <= tol) ++hi;
  const double pos = 0.5 * static_cast<double>(lo + hi);
  return psd.freqs_hz[0] + (pos + 0.5 * static_cast<double>(width - 1)) * df;
}

double awgn_variance_for_target(double p_noise, double measured_db, double target_db) {
  if (target_db > measured_db) {
    fail(ErrorCode::CannotRaiseSnr, "target SNR " + std::to_string(target_db) +
                                        " dB is above the measured " +
                                        std::to_string(measured_db) +
                                        " dB; adding noise can only lower it");
  }
  require(p_noise >= 0.0 && std::isfinite(p_noise), ErrorCode::InvalidArgument,
          "noise power must be finite and non-negative");
  return p_noise * (std::pow(10.0, (measured_db - target_db) / 10.0) - 1.0);
}

void add_complex_awgn(std::span<Sample> samples, double variance, std::uint64_t seed) {
  require(variance >= 0.0, ErrorCode::InvalidArgument, "noise variance must be non-negative");
  if (variance == 0.0) return;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, std::sqrt(variance / 2.0));
  for (auto& s : samples) {
    const double i = gauss(rng);
    const double q = gauss(rng);
    s = Sample(static_cast<float>(s.real() + i), static_cast<float>(s.imag() + q));
  }
}

IqRecording adjust_snr_awgn(const IqRecording& rec, double measured_snr_db, double target_snr_db,
                            std::span<const BurstSegment> segments, std::uint64_t seed) {
  const SnrEstimate est = estimate_snr(rec.samples, segments);
  const double variance = awgn_variance_for_target(est.p_noise, measured_snr_db, target_snr_db);
  IqRecording out = rec;
  add_complex_awgn(out.samples, variance, seed);
  return out;
}

IqRecording adjust_snr_awgn(const IqRecording& rec, double measured_snr_db, double target_snr_db,
                            const BurstSegment& seg, std::uint64_t seed) {
  return adjust_snr_awgn(rec, measured_snr_db, target_snr_db,
                         std::span<const BurstSegment>(&seg, 1), seed);
}

std::vector<double> sweep_targets(double lo_db, double hi_db, double step_db) {
  require(step_db > 0.0, ErrorCode::InvalidArgument, "sweep step must be positive");
  require(lo_db <= hi_db, ErrorCode::InvalidArgument, "sweep needs lo <= hi");
  const auto count = static_cast<std::size_t>(std::floor((hi_db - lo_db) / step_db + 1e-9)) + 1;
  std::vector<double> out(count);
  for (std::size_t i = 0; i < count; ++i) out[i] = lo_db + static_cast<double>(i) * step_db;
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) {
  // splitmix64 finalizer over the pair
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<SweepPoint> snr_sweep(const IqRecording& rec, std::span<const BurstSegment> segments,
                                  double lo_db, double hi_db, double step_db, std::uint64_t seed,
                                  std::optional<double> measured_snr_db) {
  const auto targets = sweep_targets(lo_db, hi_db, step_db);
  const SnrEstimate est = estimate_snr(rec.samples, segments);
  double measured = 0.0;
  if (measured_snr_db) {
    measured = *measured_snr_db;
  } else {
    require(est.valid, ErrorCode::InvalidArgument,
            "recording has no measurable SNR over the given segments");
    measured = est.snr_db;
  }
  std::vector<SweepPoint> out;
  out.reserve(targets.size());
  for (std::size_t i = 0; i < targets.size(); ++i) {
    SweepPoint pt;
    pt.target_db = targets[i];
    pt.noise_variance = awgn_variance_for_target(est.p_noise, measured, targets[i]);
    pt.recording = rec;
    add_complex_awgn(pt.recording.samples, pt.noise_variance, derive_seed(seed, i));
    out.push_back(std::move(pt));
  }
  return out;
}

std::vector<SweepPoint> snr_sweep(const IqRecording& rec, const BurstSegment& seg, double lo_db,
                                  double hi_db, double step_db, std::uint64_t seed) {
  return snr_sweep(rec, std::span<const BurstSegment>(&seg, 1), lo_db, hi_db, step_db, seed);
}

}  // namespace dronerf
