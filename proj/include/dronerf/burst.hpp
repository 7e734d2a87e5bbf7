#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string_view>
#include <vector>

#include "dronerf/sample.hpp"

namespace dronerf {

enum class BurstClass { Fhss, Video, DroneId, Unknown };

std::string_view to_string(BurstClass c);
std::optional<BurstClass> parse_burst_class(std::string_view text);

// Half-open sample range [start_idx, end_idx) of one detected frame.
struct BurstSegment {
  std::uint64_t start_idx = 0;
  std::uint64_t end_idx = 0;
  double duration_s = 0.0;
  BurstClass label = BurstClass::Unknown;

  static BurstSegment from_indices(std::uint64_t start, std::uint64_t end, double sample_rate_hz,
                                   BurstClass label = BurstClass::Unknown);
  std::uint64_t length() const { return end_idx - start_idx; }
  bool operator==(const BurstSegment&) const = default;
};

struct DetectorConfig {
  std::size_t short_win = 64;
  std::size_t long_win = 4096;
  double threshold_ratio = 4.0;
  std::size_t min_gap = 256;
  std::size_t min_duration = 128;

  void validate() const;
};

// Dual sliding-window energy detector.
//
// A short window centred on the current sample is compared against the mean
// power of the most recent long_win idle samples (samples that were outside
// every burst). A burst opens when the ratio rises above threshold_ratio and
// closes when it falls back below; the idle reference is frozen while a burst
// is open, so bursts much longer than long_win are not eaten by their own
// energy. Until long_win idle samples have been seen, the reference is seeded
// with the 10th percentile of non-overlapping short-window powers.
//
// Bursts separated by less than min_gap are merged, bursts shorter than
// min_duration dropped. Output is sorted and disjoint.
std::vector<BurstSegment> detect_bursts(std::span<const Sample> signal, double sample_rate_hz,
                                        const DetectorConfig& cfg = {});

// Open duration interval (min_s, max_s) mapped to a label. A duration sitting
// exactly on a band edge is left unknown.
struct DurationBand {
  BurstClass label;
  double min_s;
  double max_s;
};

struct ClassRules {
  std::vector<DurationBand> bands;

  // fhss (0, 1.5 ms), video (1.5 ms, 12 ms), everything else unknown.
  static ClassRules defaults();
};

std::vector<BurstSegment> classify_bursts(std::span<const BurstSegment> segments,
                                          const ClassRules& rules = ClassRules::defaults());

// FHSS bursts keep a fixed duration while video bursts wander between modes.
// If fewer than min_count segments are labelled fhss, the shortest tight
// duration cluster (relative spread <= tightness) with at least min_count
// members is relabelled fhss. Other labels are left alone.
std::vector<BurstSegment> refine_fhss_by_duration(std::span<const BurstSegment> segments,
                                                  double tightness = 0.05,
                                                  std::size_t min_count = 3);

std::vector<BurstSegment> select_class(std::span<const BurstSegment> segments, BurstClass label);

}  // namespace dronerf
