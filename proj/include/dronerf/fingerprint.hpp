#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dronerf/burst.hpp"
#include "dronerf/dsp.hpp"
#include "dronerf/iq_io.hpp"

namespace dronerf {

// Hop bandwidth, video bandwidth, hop duration, hop start interval and hop
// pattern period of one emitter. Times in ms, bandwidths in MHz, matching the
// reference table units.
struct RfFingerprint {
  double fhsbw_mhz = 0.0;
  std::optional<double> vtsbw_mhz;
  double fhsdt_ms = 0.0;
  double fhsdc_ms = 0.0;
  std::optional<double> fhspp_ms;  // absent: no repeating hop pattern

  // All present values positive and fhsdt <= fhsdc.
  bool is_consistent() const;
  // Throws AnomalousFingerprint when !is_consistent().
  void validate() const;
};

struct ReferenceEntry {
  std::string drone;
  RfFingerprint fingerprint;
  double file_size_gb = 0.0;
  double snr_db = 0.0;
  double center_freq_ghz = 0.0;
  bool flagged = false;  // fingerprint violates fhsdt <= fhsdc as tabulated
};

class FingerprintDb {
 public:
  FingerprintDb() = default;
  explicit FingerprintDb(std::vector<ReferenceEntry> entries);

  static FingerprintDb from_csv_string(const std::string& csv);
  static FingerprintDb from_csv(const std::filesystem::path& path);
  // The shipped 37-row table.
  static const FingerprintDb& builtin();

  const std::vector<ReferenceEntry>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  const ReferenceEntry* find(std::string_view drone) const;

 private:
  std::vector<ReferenceEntry> entries_;
};

std::string_view builtin_reference_csv();
inline constexpr std::string_view kReferenceCsvHeader =
    "Type of UAV,FHSBW (MHz),VTSBW (MHz),FHSDT (ms),FHSDC (ms),FHSPP (ms),File Size (GB),SNR (dB),MF (GHz)";

// ---------------------------------------------------------------------------
// Hop-pattern period

struct PeriodConfig {
  double time_tolerance = 0.01;    // fraction of the median event spacing
  double prominence_db = 6.0;      // peak over chance baseline
  double min_support = 0.5;        // fraction of eligible events that must repeat
  double peak_fraction = 0.95;     // shortest lag scoring this close to the peak wins
  double label_tolerance = 0.0;    // labels closer than this are the same hop channel
  double max_label_concentration = 0.75;  // above this labels carry no pattern info
};

// Period of an event train from the autocorrelation of its start times.
//
// Every pairwise start-time difference up to half the span is a candidate
// lag. For each lag, the score is the fraction of events that find a partner
// exactly one lag later (within tolerance). The peak has to beat the chance
// rate of a Poisson train with the same density by prominence_db, and at least
// min_support of the events have to repeat; otherwise the train is aperiodic.
std::optional<double> estimate_period(std::span<const double> start_times_s,
                                      const PeriodConfig& cfg = {});

// Labelled variant: a partner only counts if its label (e.g. hop centre
// frequency) matches. With informative labels the chance baseline is the
// label collision rate, so a regular hop clock with a random hop order is
// reported aperiodic while a repeating hop sequence yields its period.
std::optional<double> estimate_period(std::span<const double> start_times_s,
                                      std::span<const double> labels, const PeriodConfig& cfg);

// ---------------------------------------------------------------------------
// Spectral measurements

struct OccupiedBand {
  double low_hz = 0.0;   // centre of the lowest occupied bin
  double high_hz = 0.0;  // centre of the highest occupied bin
  double width_hz() const { return high_hz - low_hz; }
  double center_hz() const { return 0.5 * (low_hz + high_hz); }
};

// Smallest contiguous run of bins holding power_fraction of the burst's power
// (mean |X|^2 over the frames that lie inside the segment, minus noise_floor
// when given). Width is measured between the outermost bin centres.
OccupiedBand occupied_band(const BurstSegment& seg, const StftMatrix& stft,
                           double power_fraction = 0.99,
                           std::span<const double> noise_floor = {});
double occupied_bandwidth(const BurstSegment& seg, const StftMatrix& stft,
                          double power_fraction = 0.99,
                          std::span<const double> noise_floor = {});

struct BurstSpectrum {
  double bandwidth_hz = 0.0;
  double center_hz = 0.0;
};

struct ExtractConfig {
  double power_fraction = 0.99;
  PeriodConfig period;
  std::size_t max_noise_frames = 256;
  std::size_t min_fhss_bursts = 3;
};

// Bandwidth and centre frequency of every segment. Bandwidth comes from the
// noise-floor-corrected STFT of the segment; the centre from a sliding
// window, as wide as the median bandwidth of the segment's class, over its
// Welch PSD.
std::vector<BurstSpectrum> measure_bursts(const IqRecording& rec,
                                          std::span<const BurstSegment> segments,
                                          const StftConfig& stft_cfg,
                                          const ExtractConfig& cfg = {});

struct FingerprintDetails {
  RfFingerprint fingerprint;
  std::vector<BurstSegment> fhss;
  std::vector<BurstSpectrum> fhss_spectra;
  std::vector<BurstSegment> video;
  std::vector<BurstSpectrum> video_spectra;
};

FingerprintDetails extract_fingerprint_details(const IqRecording& rec,
                                               std::span<const BurstSegment> segments,
                                               const StftConfig& stft_cfg,
                                               const ExtractConfig& cfg = {});

// fhsdt: median fhss duration. fhsdc: median interval between consecutive
// fhss starts. fhspp: labelled period of the fhss starts (labels = measured
// hop centres). fhsbw / vtsbw: median occupied bandwidth per class.
RfFingerprint extract_fingerprint(const IqRecording& rec, std::span<const BurstSegment> segments,
                                  const StftConfig& stft_cfg, const ExtractConfig& cfg = {});

// ---------------------------------------------------------------------------
// Matching

struct MatchTolerances {
  double fhsbw = 0.10;
  double vtsbw = 0.10;
  double fhsdt = 0.10;
  double fhsdc = 0.10;
  double fhspp = 0.10;
};

struct MatchResult {
  std::string drone;
  double distance = 0.0;
  bool flagged = false;
};

// Candidates whose every compared field is within its relative tolerance,
// ranked by RMS relative error over the compared fields. fhspp presence must
// agree; vtsbw is compared when both sides have it, and a query with video
// never matches an entry without.
std::vector<MatchResult> match_fingerprint(const RfFingerprint& fp, const FingerprintDb& db,
                                           const MatchTolerances& tol = {});

// ---------------------------------------------------------------------------
// Video burst duration modes

struct DurationCluster {
  double center_s = 0.0;  // mean
  double spread_s = 0.0;  // standard deviation
  double min_s = 0.0;
  double max_s = 0.0;
  std::size_t count = 0;
};

// 1-D clustering of durations: sorted values split wherever consecutive
// durations are more than split_gap_s apart.
std::vector<DurationCluster> measure_video_durations(std::span<const BurstSegment> segments,
                                                     double split_gap_s = 0.25e-3,
                                                     std::size_t min_segments = 10);

}  // namespace dronerf
