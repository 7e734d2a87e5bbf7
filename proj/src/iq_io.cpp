#include "dronerf/iq_io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cstring>
#include <limits>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "dronerf/error.hpp"

namespace dronerf {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::Io: return "io-error";
    case ErrorCode::MalformedRecording: return "malformed-recording";
    case ErrorCode::Parse: return "parse-error";
    case ErrorCode::Schema: return "schema-error";
    case ErrorCode::InvalidArgument: return "invalid-argument";
    case ErrorCode::InsufficientData: return "insufficient-data";
    case ErrorCode::InvalidSample: return "invalid-sample";
    case ErrorCode::EmptyInput: return "empty-input";
    case ErrorCode::InsufficientNoise: return "insufficient-noise";
    case ErrorCode::CannotRaiseSnr: return "cannot-raise-snr";
    case ErrorCode::NoData: return "no-data";
    case ErrorCode::InsufficientBursts: return "insufficient-bursts";
    case ErrorCode::InsufficientEvents: return "insufficient-events";
    case ErrorCode::AnomalousFingerprint: return "anomalous-fingerprint";
  }
  return "unknown";
}

namespace {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
static_assert(sizeof(float) == 4 && std::numeric_limits<float>::is_iec559);

std::uint32_t byteswap32(std::uint32_t v) {
  return (v >> 24) | ((v >> 8) & 0x0000ff00u) | ((v << 8) & 0x00ff0000u) | (v << 24);
}

float decode_word(const char* p, ByteOrder order) {
  std::uint32_t w;
  std::memcpy(&w, p, 4);
  const bool file_little = order == ByteOrder::Little;
  const bool host_little = std::endian::native == std::endian::little;
  if (file_little != host_little) w = byteswap32(w);
  return std::bit_cast<float>(w);
}

void encode_word(float f, char* p) {
  std::uint32_t w = std::bit_cast<std::uint32_t>(f);
  if constexpr (std::endian::native == std::endian::big) w = byteswap32(w);
  std::memcpy(p, &w, 4);
}

void decode_samples(const char* raw, std::size_t count, ByteOrder order, Sample* out) {
  for (std::size_t k = 0; k < count; ++k) {
    out[k] = Sample(decode_word(raw + 8 * k, order), decode_word(raw + 8 * k + 4, order));
  }
}

double parse_number(const std::string& text, const std::string& field) {
  auto first = text.find_first_not_of(" \t\r\n");
  auto last = text.find_last_not_of(" \t\r\n");
  if (first == std::string::npos) fail(ErrorCode::Schema, "element <" + field + "> is empty");
  std::string_view trimmed(text.data() + first, last - first + 1);
  double value = 0.0;
  auto [ptr, ec] = std::from_chars(trimmed.data(), trimmed.data() + trimmed.size(), value);
  if (ec != std::errc() || ptr != trimmed.data() + trimmed.size()) {
    fail(ErrorCode::Schema, "element <" + field + "> is not a number: '" + std::string(trimmed) + "'");
  }
  return value;
}

std::string trim(const std::string& s) {
  auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

}  // namespace

SampleVector read_iq(const std::filesystem::path& path, ByteOrder order) {
  std::error_code ec;
  const auto size = std::filesystem::file_size(path, ec);
  if (ec) fail(ErrorCode::Io, "cannot stat " + path.string() + ": " + ec.message());
  if (size % kBytesPerSample != 0) {
    fail(ErrorCode::MalformedRecording,
         path.string() + ": size " + std::to_string(size) + " is not a multiple of 8 bytes");
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());

  const std::size_t count = size / kBytesPerSample;
  SampleVector samples(count);
  std::vector<char> raw(size);
  if (size > 0 && !in.read(raw.data(), static_cast<std::streamsize>(size))) {
    fail(ErrorCode::Io, "short read on " + path.string());
  }
  decode_samples(raw.data(), count, order, samples.data());
  return samples;
}

void write_iq(std::span<const Sample> samples, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  constexpr std::size_t kBlock = 1 << 16;
  std::vector<char> raw(kBlock * kBytesPerSample);
  for (std::size_t off = 0; off < samples.size(); off += kBlock) {
    const std::size_t n = std::min(kBlock, samples.size() - off);
    for (std::size_t k = 0; k < n; ++k) {
      encode_word(samples[off + k].real(), raw.data() + 8 * k);
      encode_word(samples[off + k].imag(), raw.data() + 8 * k + 4);
    }
    out.write(raw.data(), static_cast<std::streamsize>(n * kBytesPerSample));
  }
  out.flush();
  if (!out) fail(ErrorCode::Io, "write failed on " + path.string());
}

RecordingMetadata parse_metadata_xml_string(const std::string& xml) {
  namespace pt = boost::property_tree;
  pt::ptree tree;
  try {
    std::istringstream is(xml);
    pt::read_xml(is, tree, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    fail(ErrorCode::Parse, std::string("malformed XML: ") + e.what());
  }

  auto root = tree.get_child_optional("recording");
  if (!root || tree.size() != 1) fail(ErrorCode::Schema, "sidecar root element must be <recording>");

  RecordingMetadata meta;
  bool have_rate = false;
  for (const auto& [name, node] : *root) {
    if (name == "<xmlattr>" || name == "<xmlcomment>") continue;
    if (!node.empty()) fail(ErrorCode::Schema, "element <" + name + "> must not have children");
    const std::string text = node.data();
    if (name == "uav_type") {
      meta.uav_type = trim(text);
    } else if (name == "sample_rate_hz") {
      meta.sample_rate_hz = parse_number(text, name);
      have_rate = true;
    } else if (name == "center_freq_hz") {
      meta.center_freq_hz = parse_number(text, name);
    } else if (name == "gain_db") {
      meta.gain_db = parse_number(text, name);
    } else if (name == "source_file") {
      meta.source_file = trim(text);
    } else {
      fail(ErrorCode::Schema, "unknown sidecar element <" + name + ">");
    }
  }
  if (!have_rate) fail(ErrorCode::Schema, "sidecar is missing mandatory <sample_rate_hz>");
  if (!(meta.sample_rate_hz > 0.0)) fail(ErrorCode::Schema, "<sample_rate_hz> must be positive");
  if (meta.center_freq_hz && !(*meta.center_freq_hz >= 0.0)) {
    fail(ErrorCode::Schema, "<center_freq_hz> must be non-negative");
  }
  return meta;
}

RecordingMetadata parse_metadata_xml(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return parse_metadata_xml_string(ss.str());
  } catch (const Error& e) {
    fail(e.code(), path.string() + ": " + e.what());
  }
}

std::string metadata_to_xml(const RecordingMetadata& meta) {
  namespace pt = boost::property_tree;
  auto num = [](double v) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, p);
  };
  pt::ptree rec;
  if (meta.uav_type) rec.add("uav_type", *meta.uav_type);
  rec.add("sample_rate_hz", num(meta.sample_rate_hz));
  if (meta.center_freq_hz) rec.add("center_freq_hz", num(*meta.center_freq_hz));
  if (meta.gain_db) rec.add("gain_db", num(*meta.gain_db));
  if (meta.source_file) rec.add("source_file", *meta.source_file);
  pt::ptree tree;
  tree.add_child("recording", rec);
  std::ostringstream os;
  pt::write_xml(os, tree, pt::xml_writer_make_settings<std::string>(' ', 2));
  return os.str();
}

void write_metadata_xml(const RecordingMetadata& meta, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) fail(ErrorCode::Io, "cannot open " + path.string() + " for writing");
  out << metadata_to_xml(meta);
  if (!out) fail(ErrorCode::Io, "write failed on " + path.string());
}

std::filesystem::path sidecar_path(const std::filesystem::path& iq_path) {
  auto p = iq_path;
  p.replace_extension(".xml");
  return p;
}

IqRecording load_recording(const std::filesystem::path& iq_path,
                           std::optional<double> fallback_sample_rate_hz,
                           double fallback_center_freq_hz, ByteOrder order) {
  IqRecording rec;
  rec.samples = read_iq(iq_path, order);
  const auto xml = sidecar_path(iq_path);
  if (std::filesystem::exists(xml)) {
    auto meta = parse_metadata_xml(xml);
    rec.sample_rate_hz = meta.sample_rate_hz;
    rec.center_freq_hz = meta.center_freq_hz.value_or(fallback_center_freq_hz);
    rec.metadata = std::move(meta);
  } else {
    if (!fallback_sample_rate_hz) {
      fail(ErrorCode::InvalidArgument,
           "no sidecar " + xml.string() + " and no sample rate given");
    }
    rec.sample_rate_hz = *fallback_sample_rate_hz;
    rec.center_freq_hz = fallback_center_freq_hz;
  }
  require(rec.sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  return rec;
}

std::vector<std::span<const Sample>> chunk_stream(std::span<const Sample> samples,
                                                  std::size_t chunk_len) {
  require(chunk_len >= 1, ErrorCode::InvalidArgument, "chunk_len must be >= 1");
  std::vector<std::span<const Sample>> out;
  out.reserve(samples.size() / chunk_len + 1);
  for (std::size_t off = 0; off < samples.size(); off += chunk_len) {
    out.push_back(samples.subspan(off, std::min(chunk_len, samples.size() - off)));
  }
  return out;
}

IqChunkReader::IqChunkReader(const std::filesystem::path& path, std::size_t chunk_len,
                             ByteOrder order)
    : path_(path), in_(path, std::ios::binary), chunk_len_(chunk_len), order_(order) {
  require(chunk_len >= 1, ErrorCode::InvalidArgument, "chunk_len must be >= 1");
  if (!in_) fail(ErrorCode::Io, "cannot open " + path.string());
  raw_.resize(chunk_len_ * kBytesPerSample);
}

std::optional<SampleVector> IqChunkReader::next() {
  in_.read(raw_.data(), static_cast<std::streamsize>(raw_.size()));
  const auto got = static_cast<std::size_t>(in_.gcount());
  if (in_.bad()) fail(ErrorCode::Io, "read failed on " + path_.string());
  if (got == 0) return std::nullopt;
  if (got % kBytesPerSample != 0) {
    fail(ErrorCode::MalformedRecording,
         path_.string() + ": trailing " + std::to_string(got % kBytesPerSample) +
             " bytes do not form a whole sample");
  }
  SampleVector block(got / kBytesPerSample);
  decode_samples(raw_.data(), block.size(), order_, block.data());
  samples_read_ += block.size();
  return block;
}

}  // namespace dronerf
