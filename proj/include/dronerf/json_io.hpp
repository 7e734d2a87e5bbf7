#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "dronerf/analysis.hpp"
#include "dronerf/burst.hpp"
#include "dronerf/fingerprint.hpp"
#include "dronerf/synth.hpp"

namespace dronerf {

nlohmann::json to_json(const BurstSegment& seg);
nlohmann::json to_json(const SnrEstimate& snr);
nlohmann::json to_json(const RfFingerprint& fp);
nlohmann::json to_json(const MatchResult& m);
nlohmann::json to_json(const AnalysisReport& report);
nlohmann::json to_json(const SceneTruth& truth);

BurstSegment burst_from_json(const nlohmann::json& j, double sample_rate_hz);

// One compact JSON object per line.
std::string to_json_lines(std::span<const BurstSegment> segments);

// Synth spec file:
// {
//   "sample_rate_hz": 1e7, "duration_s": 0.1, "snr_db": 20,
//   "drone": "JUMPER T14",            (fills fhss/video from the reference table)
//   "fhss":  {"bw_hz", "duration_s", "interval_s", "period_s", "hop_freqs_hz", "amplitude"},
//   "video": {"bw_hz", "center_hz", "durations_s", "jitter_s", "gap_s", "amplitude"}
// }
// Explicit fields override values filled in from "drone".
SceneSpec scene_spec_from_json(const nlohmann::json& j, const FingerprintDb& db);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace dronerf
