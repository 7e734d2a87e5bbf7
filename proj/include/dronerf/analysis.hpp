#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dronerf/burst.hpp"
#include "dronerf/dsp.hpp"
#include "dronerf/fingerprint.hpp"
#include "dronerf/iq_io.hpp"
#include "dronerf/snr.hpp"

namespace dronerf {

struct AnalysisConfig {
  DetectorConfig detector;
  ClassRules rules = ClassRules::defaults();
  bool refine_fhss = true;
  StftConfig stft = StftConfig::with_default_hop(1024);
  ExtractConfig extract;
  MatchTolerances tolerances;
  std::size_t top_k = 3;
};

struct BurstReport {
  BurstSegment segment;
  double center_freq_hz = 0.0;  // baseband
  double bandwidth_hz = 0.0;
  SnrEstimate snr;  // burst against the idle samples of the whole recording
};

struct AnalysisReport {
  std::string input;
  double sample_rate_hz = 0.0;
  double center_freq_hz = 0.0;  // RF tuning, from the sidecar
  std::uint64_t num_samples = 0;
  std::optional<std::string> uav_type;
  std::vector<BurstReport> bursts;
  std::optional<SnrEstimate> scene_snr;
  std::optional<RfFingerprint> fingerprint;
  std::string fingerprint_error;  // why no fingerprint, when absent
  std::vector<MatchResult> matches;
};

// Detect, classify, measure, fingerprint and match one recording.
AnalysisReport analyze_recording(const IqRecording& rec, const FingerprintDb& db,
                                 const AnalysisConfig& cfg = {});

}  // namespace dronerf
