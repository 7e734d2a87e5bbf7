#include "dronerf/analysis.hpp"

#include <cmath>
#include <limits>

#include "dronerf/error.hpp"

namespace dronerf {

AnalysisReport analyze_recording(const IqRecording& rec, const FingerprintDb& db,
                                 const AnalysisConfig& cfg) {
  require(rec.sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  require_finite(rec.samples);

  AnalysisReport report;
  report.sample_rate_hz = rec.sample_rate_hz;
  report.center_freq_hz = rec.center_freq_hz;
  report.num_samples = rec.samples.size();
  if (rec.metadata) {
    report.uav_type = rec.metadata->uav_type;
    if (rec.metadata->source_file) report.input = *rec.metadata->source_file;
  }

  auto segs = classify_bursts(detect_bursts(rec.samples, rec.sample_rate_hz, cfg.detector), cfg.rules);
  if (cfg.refine_fhss) segs = refine_fhss_by_duration(segs);

  std::vector<BurstSpectrum> spectra;
  if (!segs.empty()) {
    try {
      spectra = measure_bursts(rec, segs, cfg.stft, cfg.extract);
    } catch (const Error&) {
      spectra.clear();  // reported as NaN below
    }
  }

  // Idle power: everything outside every burst.
  double idle = 0.0;
  std::uint64_t n_idle = 0;
  std::uint64_t pos = 0;
  auto add_idle = [&](std::uint64_t lo, std::uint64_t hi) {
    for (auto i = lo; i < hi; ++i) idle += std::norm(std::complex<double>(rec.samples[i]));
    n_idle += hi - lo;
  };
  for (const auto& s : segs) {
    if (s.start_idx > pos) add_idle(pos, s.start_idx);
    pos = std::max(pos, s.end_idx);
  }
  if (pos < rec.samples.size()) add_idle(pos, rec.samples.size());
  const double p_noise = n_idle ? idle / static_cast<double>(n_idle) : 0.0;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  for (std::size_t i = 0; i < segs.size(); ++i) {
    BurstReport b;
    b.segment = segs[i];
    b.center_freq_hz = spectra.empty() ? nan : spectra[i].center_hz;
    b.bandwidth_hz = spectra.empty() ? nan : spectra[i].bandwidth_hz;
    double e = 0.0;
    for (auto k = segs[i].start_idx; k < segs[i].end_idx; ++k) {
      e += std::norm(std::complex<double>(rec.samples[k]));
    }
    b.snr.p_signal_plus_noise = e / static_cast<double>(segs[i].length());
    b.snr.p_noise = p_noise;
    b.snr.valid = n_idle > 0 && p_noise > 0.0 && b.snr.p_signal_plus_noise > p_noise;
    b.snr.snr_db = b.snr.valid
                       ? 10.0 * std::log10((b.snr.p_signal_plus_noise - p_noise) / p_noise)
                       : nan;
    report.bursts.push_back(b);
  }
  if (!segs.empty() && n_idle > 0) report.scene_snr = estimate_snr(rec.samples, segs);

  try {
    report.fingerprint = extract_fingerprint(rec, segs, cfg.stft, cfg.extract);
    auto matches = match_fingerprint(*report.fingerprint, db, cfg.tolerances);
    if (matches.size() > cfg.top_k) matches.resize(cfg.top_k);
    report.matches = std::move(matches);
  } catch (const Error& e) {
    report.fingerprint_error = e.what();
  }
  return report;
}

}  // namespace dronerf
