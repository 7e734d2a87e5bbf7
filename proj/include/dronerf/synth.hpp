#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "dronerf/burst.hpp"
#include "dronerf/fingerprint.hpp"
#include "dronerf/sample.hpp"

namespace dronerf {

struct FhssSpec {
  double hop_bw_hz = 0.0;
  double hop_duration_s = 0.0;
  double duty_interval_s = 0.0;            // start-to-start spacing inside a pattern
  std::optional<double> pattern_period_s;  // absent: random hop order, no repeat
  std::vector<double> hop_freqs_hz;        // baseband hop centres
  double amplitude = 1.0;                  // RMS of each burst
  std::optional<double> start_offset_s;    // default: half the idle time of one slot

  void validate(double sample_rate_hz) const;
};

struct VideoSpec {
  double bw_hz = 0.0;
  double center_hz = 0.0;
  std::vector<double> duration_set_s;  // each burst picks one uniformly
  double jitter_s = 0.0;               // then moves it uniformly within +-jitter_s
  double inter_burst_s = 0.0;
  double amplitude = 1.0;
  std::optional<double> start_offset_s;

  void validate(double sample_rate_hz) const;
};

struct TruthBurst {
  BurstSegment segment;  // includes the edge ramps
  double center_hz = 0.0;
  double bandwidth_hz = 0.0;
  int emitter = 0;  // 0 fhss, 1 video
};

struct SceneTruth {
  std::vector<TruthBurst> bursts;  // sorted by start
  double sample_rate_hz = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> injected_snr_db;
  double noise_variance = 0.0;

  std::vector<BurstSegment> segments() const;
  std::vector<BurstSegment> segments(BurstClass label) const;
};

struct Scene {
  SampleVector samples;
  SceneTruth truth;
};

// Burst waveform: complex Gaussian with a flat spectrum over the band,
// rescaled to the requested RMS, with raised-cosine edges of
// min(1 % of the burst, kMaxRampSamples).
inline constexpr std::size_t kMaxRampSamples = 32;

// With a pattern period P, each period holds ceil(P / D) hops (one fewer if
// the last would run into the next period) at spacing D, and hop i of a
// period uses hop_freqs[i % K]. Without P the hops are evenly spaced with a
// random hop order. Only whole bursts are placed; fewer than 4 is an error.
Scene synth_fhss(const FhssSpec& spec, double sample_rate_hz, double total_s, std::uint64_t seed);

Scene synth_video(const VideoSpec& spec, double sample_rate_hz, double total_s, std::uint64_t seed);

// Adds white complex noise so that mean |s|^2 over the union of truth
// segments over the noise variance equals 10^(target / 10).
void add_noise_at_snr(Scene& scene, double target_snr_db, std::uint64_t seed);

struct SceneSpec {
  double sample_rate_hz = 0.0;
  double duration_s = 0.0;
  std::optional<FhssSpec> fhss;
  std::optional<VideoSpec> video;
  std::optional<double> snr_db;
  double guard_s = 0.1e-3;  // minimum idle time around video bursts in a mixed scene
};

// FHSS first, then video bursts fitted into the FHSS gaps (with guard_s of
// idle time either side), so emitters never overlap in time.
Scene synth_scene(const SceneSpec& spec, std::uint64_t seed);

// Scene from a reference fingerprint: the smallest standard sample rate that
// holds the widest band with margin, evenly spread hop centres, and a length
// that covers at least 2.6 pattern periods.
struct FingerprintSceneOptions {
  std::size_t n_hop_freqs = 4;
  bool with_video = true;
  std::optional<double> snr_db = 30.0;
  double time_scale = 1.0;  // dilates every time quantity
};

double desk_sample_rate(const RfFingerprint& fp, bool with_video);
SceneSpec scene_spec_for(const RfFingerprint& fp, const FingerprintSceneOptions& opts = {});

}  // namespace dronerf
