#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "dronerf/burst.hpp"
#include "dronerf/dsp.hpp"
#include "dronerf/iq_io.hpp"

namespace dronerf {

// SNR = 10 log10((P_{S+N} - P_N) / P_N). When the burst region carries no
// excess power the estimate is flagged invalid and snr_db is NaN.
struct SnrEstimate {
  double snr_db = 0.0;
  double p_signal_plus_noise = 0.0;
  double p_noise = 0.0;
  bool valid = false;
};

// P_{S+N} = mean |x|^2 over [N_s, N_e); P_N = mean |x|^2 over the rest of
// the signal.
SnrEstimate estimate_snr(std::span<const Sample> signal, const BurstSegment& seg);

// Scene form: P_{S+N} over the union of the given segments, P_N over
// everything outside all of them.
SnrEstimate estimate_snr(std::span<const Sample> signal, std::span<const BurstSegment> segments);

// Slides a window of search_bw over the PSD and returns the frequency at the
// centre of the window that captures the most power. Ties (a plateau of
// equally good positions) resolve to the middle of the plateau.
double estimate_center_frequency(const PsdEstimate& psd, double search_bw_hz);

// Added-noise variance that takes a recording measured at measured_db down to
// target_db under the P_N' = P_N + sigma^2 power model.
double awgn_variance_for_target(double p_noise, double measured_db, double target_db);

// Adds circularly-symmetric complex Gaussian noise, E|n|^2 = variance.
void add_complex_awgn(std::span<Sample> samples, double variance, std::uint64_t seed);

IqRecording adjust_snr_awgn(const IqRecording& rec, double measured_snr_db, double target_snr_db,
                            const BurstSegment& seg, std::uint64_t seed);
IqRecording adjust_snr_awgn(const IqRecording& rec, double measured_snr_db, double target_snr_db,
                            std::span<const BurstSegment> segments, std::uint64_t seed);

struct SweepPoint {
  double target_db = 0.0;
  double noise_variance = 0.0;
  IqRecording recording;
};

// Targets lo, lo+step, ... up to hi; count = floor((hi - lo) / step) + 1.
std::vector<double> sweep_targets(double lo_db, double hi_db, double step_db);

// Deterministic per-target seed derived from the sweep seed.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index);

// One adjusted copy per target. The measured SNR is estimated from the
// recording over the given segments unless supplied.
std::vector<SweepPoint> snr_sweep(const IqRecording& rec, std::span<const BurstSegment> segments,
                                  double lo_db, double hi_db, double step_db, std::uint64_t seed,
                                  std::optional<double> measured_snr_db = std::nullopt);
std::vector<SweepPoint> snr_sweep(const IqRecording& rec, const BurstSegment& seg, double lo_db,
                                  double hi_db, double step_db, std::uint64_t seed);

}  // namespace dronerf
