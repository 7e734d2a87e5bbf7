#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dronerf/sample.hpp"

namespace dronerf {

enum class ByteOrder { Little, Big };

// Contents of the `<name>.xml` sidecar. Only sample_rate_hz is mandatory.
struct RecordingMetadata {
  std::optional<std::string> uav_type;
  double sample_rate_hz = 0.0;
  std::optional<double> center_freq_hz;
  std::optional<double> gain_db;
  std::optional<std::string> source_file;

  bool operator==(const RecordingMetadata&) const = default;
};

struct IqRecording {
  SampleVector samples;
  double sample_rate_hz = 0.0;
  double center_freq_hz = 0.0;
  std::optional<RecordingMetadata> metadata;

  double duration_s() const {
    return sample_rate_hz > 0.0 ? static_cast<double>(samples.size()) / sample_rate_hz : 0.0;
  }
};

inline constexpr std::size_t kBytesPerSample = 8;

// Raw headerless interleaved fp32 I,Q. NaN/Inf pass through untouched.
SampleVector read_iq(const std::filesystem::path& path, ByteOrder order = ByteOrder::Little);
void write_iq(std::span<const Sample> samples, const std::filesystem::path& path);
inline void write_iq(const IqRecording& rec, const std::filesystem::path& path) {
  write_iq(rec.samples, path);
}

RecordingMetadata parse_metadata_xml(const std::filesystem::path& path);
RecordingMetadata parse_metadata_xml_string(const std::string& xml);
std::string metadata_to_xml(const RecordingMetadata& meta);
void write_metadata_xml(const RecordingMetadata& meta, const std::filesystem::path& path);

// `foo.iq` -> `foo.xml`
std::filesystem::path sidecar_path(const std::filesystem::path& iq_path);

// Reads samples plus the sidecar (when present). Without a sidecar the caller
// must supply the sample rate; fallback values are only used in that case.
IqRecording load_recording(const std::filesystem::path& iq_path,
                           std::optional<double> fallback_sample_rate_hz = std::nullopt,
                           double fallback_center_freq_hz = 0.0,
                           ByteOrder order = ByteOrder::Little);

// Splits an in-memory sequence into consecutive views of chunk_len samples;
// only the last one may be shorter.
std::vector<std::span<const Sample>> chunk_stream(std::span<const Sample> samples,
                                                  std::size_t chunk_len);

// File-backed chunk source. The total length is never required up front, so
// the same reader works on files that are still growing.
class IqChunkReader {
 public:
  IqChunkReader(const std::filesystem::path& path, std::size_t chunk_len,
                ByteOrder order = ByteOrder::Little);

  // Empty optional once the stream is exhausted. A trailing partial sample
  // (fewer than 8 bytes) is reported as a malformed-recording error.
  std::optional<SampleVector> next();

  std::uint64_t samples_read() const { return samples_read_; }

 private:
  std::filesystem::path path_;
  std::ifstream in_;
  std::size_t chunk_len_;
  ByteOrder order_;
  std::uint64_t samples_read_ = 0;
  std::vector<char> raw_;
};

}  // namespace dronerf
