#include <doctest.h>

#include <bit>
#include <cstring>

#include "dronerf/error.hpp"
#include "dronerf/iq_io.hpp"
#include "support.hpp"

using namespace dronerf;
using dronerf::test::ScratchDir;

namespace {

std::vector<char> le_words(std::initializer_list<float> words) {
  std::vector<char> out;
  for (float f : words) {
    auto u = std::bit_cast<std::uint32_t>(f);
    for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((u >> (8 * b)) & 0xff));
  }
  return out;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected a dronerf::Error");
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("two unit samples decode from little-endian words") {
  ScratchDir dir("iq");
  test::write_bytes(dir / "a.iq", le_words({1.0f, 0.0f, 0.0f, 1.0f}));
  const auto x = read_iq(dir / "a.iq");
  REQUIRE(x.size() == 2);
  CHECK(x[0] == Sample(1.0f, 0.0f));
  CHECK(x[1] == Sample(0.0f, 1.0f));
}

TEST_CASE("empty file is an empty recording") {
  ScratchDir dir("iq");
  test::write_bytes(dir / "e.iq", {});
  CHECK(read_iq(dir / "e.iq").empty());
  write_iq(SampleVector{}, dir / "w.iq");
  CHECK(std::filesystem::file_size(dir / "w.iq") == 0);
}

TEST_CASE("single sample writes as eight bytes") {
  ScratchDir dir("iq");
  write_iq(SampleVector{Sample(1.0f, 0.0f)}, dir / "one.iq");
  CHECK(test::read_bytes(dir / "one.iq") == le_words({1.0f, 0.0f}));
}

TEST_CASE("size not a multiple of 8 is malformed") {
  ScratchDir dir("iq");
  auto bytes = le_words({1.0f, 2.0f, 3.0f});
  test::write_bytes(dir / "bad.iq", bytes);
  CHECK(code_of([&] { read_iq(dir / "bad.iq"); }) == ErrorCode::MalformedRecording);
  CHECK(code_of([&] { read_iq(dir / "missing.iq"); }) == ErrorCode::Io);
}

TEST_CASE("big-endian flag swaps byte order") {
  ScratchDir dir("iq");
  auto le = le_words({1.5f, -2.25f});
  std::vector<char> be;
  for (std::size_t w = 0; w < le.size(); w += 4) {
    for (int b = 3; b >= 0; --b) be.push_back(le[w + static_cast<std::size_t>(b)]);
  }
  test::write_bytes(dir / "be.iq", be);
  const auto x = read_iq(dir / "be.iq", ByteOrder::Big);
  REQUIRE(x.size() == 1);
  CHECK(x[0] == Sample(1.5f, -2.25f));
}

TEST_CASE("random files round-trip byte for byte") {
  ScratchDir dir("iq");
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<char> bytes(8 * (rng() % 5000));
    for (auto& b : bytes) b = static_cast<char>(rng() & 0xff);
    // Arbitrary bit patterns include NaN payloads; they must survive untouched.
    test::write_bytes(dir / "r.iq", bytes);
    write_iq(read_iq(dir / "r.iq"), dir / "r2.iq");
    REQUIRE(test::read_bytes(dir / "r2.iq") == bytes);
  }
}

TEST_CASE("a million samples round-trip exactly") {
  ScratchDir dir("iq");
  const auto x = test::random_signal(1'000'000, 5);
  write_iq(x, dir / "m.iq");
  const auto y = read_iq(dir / "m.iq");
  REQUIRE(y.size() == x.size());
  CHECK(std::memcmp(x.data(), y.data(), x.size() * sizeof(Sample)) == 0);
}

TEST_CASE("non-finite samples pass through reads") {
  ScratchDir dir("iq");
  const float nan = std::numeric_limits<float>::quiet_NaN();
  test::write_bytes(dir / "n.iq", le_words({nan, 1.0f, std::numeric_limits<float>::infinity(), 0.0f}));
  const auto x = read_iq(dir / "n.iq");
  REQUIRE(x.size() == 2);
  CHECK(std::isnan(x[0].real()));
  CHECK(std::isinf(x[1].real()));
}

TEST_CASE("sidecar parsing") {
  SUBCASE("100 MHz acquisition rate") {
    const auto m = parse_metadata_xml_string(
        "<recording><sample_rate_hz>100e6</sample_rate_hz></recording>");
    CHECK(m.sample_rate_hz == 1.0e8);
    CHECK_FALSE(m.gain_db.has_value());
    CHECK_FALSE(m.center_freq_hz.has_value());
  }
  SUBCASE("FPV COMBO centre frequency") {
    const auto m = parse_metadata_xml_string(
        "<recording><uav_type>DJI FPV COMBO</uav_type><sample_rate_hz>100000000</sample_rate_hz>"
        "<center_freq_hz>5.76e9</center_freq_hz></recording>");
    CHECK(m.center_freq_hz == 5.76e9);
    CHECK(m.uav_type == "DJI FPV COMBO");
  }
  SUBCASE("malformed and incomplete documents") {
    CHECK(code_of([] { parse_metadata_xml_string("<recording><sample_rate_hz>1"); }) ==
          ErrorCode::Parse);
    CHECK(code_of([] { parse_metadata_xml_string("<recording><gain_db>3</gain_db></recording>"); }) ==
          ErrorCode::Schema);
    CHECK(code_of([] {
            parse_metadata_xml_string(
                "<recording><sample_rate_hz>1e6</sample_rate_hz><colour>red</colour></recording>");
          }) == ErrorCode::Schema);
    CHECK(code_of([] {
            parse_metadata_xml_string("<recording><sample_rate_hz>fast</sample_rate_hz></recording>");
          }) == ErrorCode::Schema);
  }
  SUBCASE("write then parse") {
    RecordingMetadata m;
    m.uav_type = "JUMPER T14";
    m.sample_rate_hz = 12.5e6;
    m.center_freq_hz = 2.44e9;
    m.gain_db = 31.5;
    m.source_file = "t14.iq";
    CHECK(parse_metadata_xml_string(metadata_to_xml(m)) == m);
  }
}

TEST_CASE("load_recording prefers the sidecar") {
  ScratchDir dir("iq");
  write_iq(test::random_signal(16, 1), dir / "s.iq");
  CHECK(code_of([&] { load_recording(dir / "s.iq"); }) == ErrorCode::InvalidArgument);
  auto fallback = load_recording(dir / "s.iq", 1e6, 2.4e9);
  CHECK(fallback.sample_rate_hz == 1e6);
  RecordingMetadata m;
  m.sample_rate_hz = 2e7;
  write_metadata_xml(m, sidecar_path(dir / "s.iq"));
  auto rec = load_recording(dir / "s.iq", 1e6);
  CHECK(rec.sample_rate_hz == 2e7);
  CHECK(rec.samples.size() == 16);
  CHECK(rec.duration_s() == doctest::Approx(16 / 2e7));
}

TEST_CASE("chunk_stream sizes") {
  const auto x = test::random_signal(10, 2);
  auto sizes = [&](std::size_t len) {
    std::vector<std::size_t> out;
    for (auto c : chunk_stream(x, len)) out.push_back(c.size());
    return out;
  };
  CHECK(sizes(4) == std::vector<std::size_t>{4, 4, 2});
  CHECK(sizes(10) == std::vector<std::size_t>{10});
  CHECK(code_of([&] { chunk_stream(x, 0); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("chunking preserves content for random lengths") {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = test::random_signal(rng() % 3000, trial);
    const std::size_t len = 1 + rng() % 700;
    SampleVector joined;
    const auto chunks = chunk_stream(x, len);
    for (std::size_t i = 0; i < chunks.size(); ++i) {
      if (i + 1 < chunks.size()) REQUIRE(chunks[i].size() == len);
      joined.insert(joined.end(), chunks[i].begin(), chunks[i].end());
    }
    REQUIRE(joined == x);
  }
}

TEST_CASE("file chunk reader matches a whole read") {
  ScratchDir dir("iq");
  const auto x = test::random_signal(12345, 9);
  write_iq(x, dir / "c.iq");
  for (std::size_t len : {1u, 7u, 4096u, 20000u}) {
    IqChunkReader reader(dir / "c.iq", len);
    SampleVector joined;
    while (auto c = reader.next()) {
      CHECK(c->size() <= len);
      joined.insert(joined.end(), c->begin(), c->end());
    }
    CHECK(joined == x);
    CHECK(reader.samples_read() == x.size());
  }
  auto bytes = test::read_bytes(dir / "c.iq");
  bytes.resize(bytes.size() - 3);
  test::write_bytes(dir / "t.iq", bytes);
  IqChunkReader reader(dir / "t.iq", 1000);
  CHECK(code_of([&] {
          while (reader.next()) {
          }
        }) == ErrorCode::MalformedRecording);
}
