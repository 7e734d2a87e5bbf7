#include "dronerf/json_io.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "dronerf/error.hpp"

namespace dronerf {
namespace {

using nlohmann::json;

json number_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

template <class T>
json optional_or_null(const std::optional<T>& v) {
  return v ? json(*v) : json(nullptr);
}

void check_keys(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
  require(j.is_object(), ErrorCode::Schema, where + " must be a JSON object");
  std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [k, v] : j.items()) {
    require(ok.count(k) > 0, ErrorCode::Schema, "unknown key '" + k + "' in " + where);
  }
}

double get_number(const json& j, const char* key, const std::string& where) {
  require(j.contains(key), ErrorCode::Schema, where + " is missing '" + key + "'");
  require(j.at(key).is_number(), ErrorCode::Schema, where + "." + key + " must be a number");
  return j.at(key).get<double>();
}

std::vector<double> get_numbers(const json& j, const char* key, const std::string& where) {
  require(j.at(key).is_array(), ErrorCode::Schema, where + "." + key + " must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    require(v.is_number(), ErrorCode::Schema, where + "." + key + " must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

json to_json(const BurstSegment& seg) {
  return {{"start_idx", seg.start_idx},
          {"end_idx", seg.end_idx},
          {"duration_s", seg.duration_s},
          {"class", std::string(to_string(seg.label))}};
}

json to_json(const SnrEstimate& snr) {
  return {{"snr_db", number_or_null(snr.snr_db)},
          {"p_signal_plus_noise", snr.p_signal_plus_noise},
          {"p_noise", snr.p_noise},
          {"valid", snr.valid}};
}

json to_json(const RfFingerprint& fp) {
  return {{"fhsbw_mhz", fp.fhsbw_mhz},
          {"vtsbw_mhz", optional_or_null(fp.vtsbw_mhz)},
          {"fhsdt_ms", fp.fhsdt_ms},
          {"fhsdc_ms", fp.fhsdc_ms},
          {"fhspp_ms", optional_or_null(fp.fhspp_ms)}};
}

json to_json(const MatchResult& m) {
  return {{"drone", m.drone}, {"distance", m.distance}, {"flagged", m.flagged}};
}

json to_json(const AnalysisReport& r) {
  json bursts = json::array();
  for (const auto& b : r.bursts) {
    json j = to_json(b.segment);
    j["center_freq_hz"] = number_or_null(b.center_freq_hz);
    j["bandwidth_hz"] = number_or_null(b.bandwidth_hz);
    j["snr_db"] = number_or_null(b.snr.snr_db);
    j["snr_valid"] = b.snr.valid;
    bursts.push_back(std::move(j));
  }
  json matches = json::array();
  for (const auto& m : r.matches) matches.push_back(to_json(m));
  return {{"input", r.input},
          {"sample_rate_hz", r.sample_rate_hz},
          {"center_freq_hz", r.center_freq_hz},
          {"num_samples", r.num_samples},
          {"uav_type", optional_or_null(r.uav_type)},
          {"bursts", std::move(bursts)},
          {"scene_snr", r.scene_snr ? to_json(*r.scene_snr) : json(nullptr)},
          {"fingerprint", r.fingerprint ? to_json(*r.fingerprint) : json(nullptr)},
          {"fingerprint_error", r.fingerprint_error.empty() ? json(nullptr) : json(r.fingerprint_error)},
          {"matches", std::move(matches)}};
}

json to_json(const SceneTruth& t) {
  json bursts = json::array();
  for (const auto& b : t.bursts) {
    json j = to_json(b.segment);
    j["center_hz"] = b.center_hz;
    j["bandwidth_hz"] = b.bandwidth_hz;
    j["emitter"] = b.emitter;
    bursts.push_back(std::move(j));
  }
  return {{"sample_rate_hz", t.sample_rate_hz},
          {"seed", t.seed},
          {"injected_snr_db", optional_or_null(t.injected_snr_db)},
          {"noise_variance", t.noise_variance},
          {"bursts", std::move(bursts)}};
}

BurstSegment burst_from_json(const json& j, double sample_rate_hz) {
  require(j.is_object(), ErrorCode::Schema, "burst must be a JSON object");
  require(j.contains("start_idx") && j.at("start_idx").is_number_unsigned() &&
              j.contains("end_idx") && j.at("end_idx").is_number_unsigned(),
          ErrorCode::Schema, "burst needs unsigned start_idx and end_idx");
  const auto s = j.at("start_idx").get<std::uint64_t>();
  const auto e = j.at("end_idx").get<std::uint64_t>();
  require(e > s, ErrorCode::Schema, "burst end_idx must exceed start_idx");
  BurstClass label = BurstClass::Unknown;
  if (j.contains("class")) {
    require(j.at("class").is_string(), ErrorCode::Schema, "burst class must be a string");
    const auto parsed = parse_burst_class(j.at("class").get<std::string>());
    require(parsed.has_value(), ErrorCode::Schema, "unknown burst class");
    label = *parsed;
  }
  return BurstSegment::from_indices(s, e, sample_rate_hz, label);
}

std::string to_json_lines(std::span<const BurstSegment> segments) {
  std::string out;
  for (const auto& s : segments) {
    out += to_json(s).dump();
    out += '\n';
  }
  return out;
}

SceneSpec scene_spec_from_json(const json& j, const FingerprintDb& db) {
  check_keys(j, {"sample_rate_hz", "duration_s", "snr_db", "drone", "fhss", "video", "guard_s"},
             "synth spec");
  SceneSpec spec;
  if (j.contains("drone")) {
    require(j.at("drone").is_string(), ErrorCode::Schema, "drone must be a string");
    const auto name = j.at("drone").get<std::string>();
    const auto* entry = db.find(name);
    require(entry != nullptr, ErrorCode::InvalidArgument, "unknown drone '" + name + "'");
    require(!entry->flagged, ErrorCode::AnomalousFingerprint,
            "reference row '" + name + "' is flagged anomalous and cannot be synthesised");
    spec = scene_spec_for(entry->fingerprint);
  }
  if (j.contains("sample_rate_hz")) spec.sample_rate_hz = get_number(j, "sample_rate_hz", "synth spec");
  if (j.contains("duration_s")) spec.duration_s = get_number(j, "duration_s", "synth spec");
  if (j.contains("guard_s")) spec.guard_s = get_number(j, "guard_s", "synth spec");
  if (j.contains("snr_db")) {
    if (j.at("snr_db").is_null()) {
      spec.snr_db.reset();
    } else {
      spec.snr_db = get_number(j, "snr_db", "synth spec");
    }
  }

  if (j.contains("fhss")) {
    const auto& f = j.at("fhss");
    if (f.is_null()) {
      spec.fhss.reset();
    } else {
      check_keys(f, {"bw_hz", "duration_s", "interval_s", "period_s", "hop_freqs_hz", "amplitude",
                     "start_offset_s"},
                 "fhss");
      FhssSpec s = spec.fhss.value_or(FhssSpec{});
      if (f.contains("bw_hz")) s.hop_bw_hz = get_number(f, "bw_hz", "fhss");
      if (f.contains("duration_s")) s.hop_duration_s = get_number(f, "duration_s", "fhss");
      if (f.contains("interval_s")) s.duty_interval_s = get_number(f, "interval_s", "fhss");
      if (f.contains("period_s")) {
        if (f.at("period_s").is_null()) {
          s.pattern_period_s.reset();
        } else {
          s.pattern_period_s = get_number(f, "period_s", "fhss");
        }
      }
      if (f.contains("hop_freqs_hz")) s.hop_freqs_hz = get_numbers(f, "hop_freqs_hz", "fhss");
      if (f.contains("amplitude")) s.amplitude = get_number(f, "amplitude", "fhss");
      if (f.contains("start_offset_s")) s.start_offset_s = get_number(f, "start_offset_s", "fhss");
      spec.fhss = s;
    }
  }
  if (j.contains("video")) {
    const auto& v = j.at("video");
    if (v.is_null()) {
      spec.video.reset();
    } else {
      check_keys(v, {"bw_hz", "center_hz", "durations_s", "jitter_s", "gap_s", "amplitude",
                     "start_offset_s"},
                 "video");
      VideoSpec s = spec.video.value_or(VideoSpec{});
      if (v.contains("bw_hz")) s.bw_hz = get_number(v, "bw_hz", "video");
      if (v.contains("center_hz")) s.center_hz = get_number(v, "center_hz", "video");
      if (v.contains("durations_s")) s.duration_set_s = get_numbers(v, "durations_s", "video");
      if (v.contains("jitter_s")) s.jitter_s = get_number(v, "jitter_s", "video");
      if (v.contains("gap_s")) s.inter_burst_s = get_number(v, "gap_s", "video");
      if (v.contains("amplitude")) s.amplitude = get_number(v, "amplitude", "video");
      if (v.contains("start_offset_s")) s.start_offset_s = get_number(v, "start_offset_s", "video");
      spec.video = s;
    }
  }
  require(spec.sample_rate_hz > 0.0, ErrorCode::Schema, "synth spec needs sample_rate_hz");
  require(spec.duration_s > 0.0, ErrorCode::Schema, "synth spec needs duration_s");
  require(spec.fhss || spec.video, ErrorCode::Schema, "synth spec needs fhss, video or drone");
  return spec;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(static_cast<bool>(out), ErrorCode::Io, "cannot write " + path.string());
  out << text;
  require(static_cast<bool>(out), ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace dronerf
