#include <doctest.h>

#include <random>

#include "dronerf/error.hpp"
#include "dronerf/fingerprint.hpp"
#include "dronerf/synth.hpp"
#include "support.hpp"

using namespace dronerf;

namespace {

const RfFingerprint& ref(std::string_view name) {
  const auto* e = FingerprintDb::builtin().find(name);
  REQUIRE(e != nullptr);
  return e->fingerprint;
}

RfFingerprint extract_from_truth(const SceneSpec& spec, std::uint64_t seed) {
  const Scene sc = synth_scene(spec, seed);
  IqRecording rec{sc.samples, spec.sample_rate_hz, 0.0, std::nullopt};
  const auto segs = sc.truth.segments();
  return extract_fingerprint(rec, segs, StftConfig::with_default_hop(1024));
}

bool within(double got, double want, double rel) { return std::abs(got / want - 1.0) <= rel; }

// Single noiseless burst occupying [0, n) of a longer zero signal.
IqRecording one_burst(const VideoSpec& v, double fs, std::uint64_t seed) {
  const Scene sc = synth_video(v, fs, 4 * v.duration_set_s[0], seed);
  return {sc.samples, fs, 0.0, std::nullopt};
}

std::vector<BurstSegment> durations_ms(const std::vector<double>& modes, int per_mode,
                                       double jitter_ms, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> j(-jitter_ms, jitter_ms);
  std::vector<BurstSegment> out;
  std::uint64_t pos = 0;
  const double fs = 10e6;
  for (int i = 0; i < per_mode; ++i) {
    for (double m : modes) {
      const auto n = static_cast<std::uint64_t>(std::llround((m + j(rng)) * 1e-3 * fs));
      out.push_back(BurstSegment::from_indices(pos, pos + n, fs, BurstClass::Video));
      pos += n + 10000;
    }
  }
  return out;
}

}  // namespace

TEST_CASE("builtin table") {
  const auto& db = FingerprintDb::builtin();
  CHECK(db.size() == 37);
  std::size_t flagged = 0;
  for (const auto& e : db.entries()) {
    if (e.flagged) {
      ++flagged;
      CHECK(e.drone == "WFLY WFT09SII");
    }
  }
  CHECK(flagged == 1);
  const auto& fpv = ref("DJI FPV COMBO");
  CHECK(fpv.fhsbw_mhz == 5.0);
  CHECK(fpv.vtsbw_mhz == 10.0);
  CHECK(fpv.fhspp_ms == 38.3);
  CHECK_FALSE(ref("SIYI MK15").fhspp_ms.has_value());
  CHECK_FALSE(ref("JUMPER T14").vtsbw_mhz.has_value());
  CHECK(FingerprintDb::builtin().find("nope") == nullptr);
}

TEST_CASE("csv parsing errors") {
  const std::string header(kReferenceCsvHeader);
  CHECK(FingerprintDb::from_csv_string(header + "\nA,1,-,1,2,-,1,1,2.4\n").size() == 1);
  auto code = [](const std::string& csv) {
    try {
      FingerprintDb::from_csv_string(csv);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::Io;
  };
  CHECK(code("Type,FHSBW\nA,1\n") == ErrorCode::Schema);
  CHECK(code(header + "\nA,1,-,1,2\n") == ErrorCode::Parse);
  CHECK(code(header + "\nA,-,-,1,2,-,1,1,2.4\n") == ErrorCode::Parse);
  CHECK(code(header + "\nA,x,-,1,2,-,1,1,2.4\n") == ErrorCode::Parse);
}

TEST_CASE("consistency") {
  RfFingerprint fp{5, 10, 0.64, 4, 38.3};
  CHECK(fp.is_consistent());
  fp.fhsdt_ms = 5.0;
  CHECK_FALSE(fp.is_consistent());
  CHECK_THROWS_AS(fp.validate(), Error);
  CHECK_THROWS_AS(ref("WFLY WFT09SII").validate(), Error);
  try {
    scene_spec_for(ref("WFLY WFT09SII"));
    FAIL("anomalous row accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::AnomalousFingerprint);
  }
}

TEST_CASE("occupied bandwidth of a flat band") {
  const double fs = 10e6;
  const auto cfg = StftConfig::with_default_hop(1024);
  const double df = fs / 1024.0;
  for (int bins : {8, 20, 50, 100}) {
    VideoSpec v;
    v.bw_hz = bins * df;
    v.center_hz = 1.2e6;
    v.duration_set_s = {2e-3};
    v.inter_burst_s = 2e-3;
    const auto rec = one_burst(v, fs, static_cast<std::uint64_t>(bins));
    const auto sc = synth_video(v, fs, 8e-3, static_cast<std::uint64_t>(bins));
    const auto seg = sc.truth.bursts.front().segment;
    const auto m = stft(rec.samples, fs, cfg);
    const auto band = occupied_band(seg, m);
    CAPTURE(bins);
    CHECK(std::abs(band.width_hz() - v.bw_hz) <= 2 * df);
    CHECK(std::abs(band.center_hz() - v.center_hz) <= 2 * df);
  }
}

TEST_CASE("occupied bandwidth of a tone") {
  const double fs = 10e6;
  const auto cfg = StftConfig::with_default_hop(1024);
  SampleVector x(40000);
  const auto t = test::tone(20000, 2.5e6 + 1234.0, fs);
  std::copy(t.begin(), t.end(), x.begin() + 10000);
  const auto m = stft(x, fs, cfg);
  const auto seg = BurstSegment::from_indices(10000, 30000, fs);
  CHECK(occupied_bandwidth(seg, m) <= 2 * m.freq_resolution_hz);
  const std::vector<double> floor_too_high(1024, 1e12);
  CHECK_THROWS_AS(occupied_bandwidth(seg, m, 0.99, floor_too_high), Error);
}

TEST_CASE("hop bandwidth of a narrow link") {
  auto spec = scene_spec_for(ref("Herelink HX4"));
  const auto fp = extract_from_truth(spec, 4);
  CHECK(within(fp.fhsbw_mhz, 2.96, 0.05));
}

TEST_CASE("fingerprint of a synthesized FPV link") {
  const auto& want = ref("DJI FPV COMBO");
  const auto fp = extract_from_truth(scene_spec_for(want), 1);
  CHECK(within(fp.fhsbw_mhz, want.fhsbw_mhz, 0.05));
  CHECK(within(fp.fhsdt_ms, want.fhsdt_ms, 0.05));
  CHECK(within(fp.fhsdc_ms, want.fhsdc_ms, 0.05));
  REQUIRE(fp.fhspp_ms.has_value());
  CHECK(within(*fp.fhspp_ms, *want.fhspp_ms, 0.05));
  REQUIRE(fp.vtsbw_mhz.has_value());
  CHECK(within(*fp.vtsbw_mhz, *want.vtsbw_mhz, 0.05));
  const auto matches = match_fingerprint(fp, FingerprintDb::builtin());
  REQUIRE_FALSE(matches.empty());
  CHECK(matches.front().drone == "DJI FPV COMBO");
}

TEST_CASE("random hop order has no pattern period") {
  auto spec = scene_spec_for(ref("DJI FPV COMBO"));
  spec.fhss->pattern_period_s.reset();
  spec.duration_s = 40 * spec.fhss->duty_interval_s;
  for (std::uint64_t seed = 1; seed <= 3; ++seed) {
    const auto fp = extract_from_truth(spec, seed);
    CHECK_FALSE(fp.fhspp_ms.has_value());
    CHECK(within(fp.fhsdc_ms, 4.0, 0.05));
  }
}

TEST_CASE("time dilation scales the time fields") {
  const auto& want = ref("DJI FPV COMBO");
  FingerprintSceneOptions opts;
  opts.time_scale = 1.5;
  const auto fp = extract_from_truth(scene_spec_for(want, opts), 2);
  CHECK(within(fp.fhsbw_mhz, want.fhsbw_mhz, 0.05));
  CHECK(within(fp.fhsdt_ms, 1.5 * want.fhsdt_ms, 0.05));
  CHECK(within(fp.fhsdc_ms, 1.5 * want.fhsdc_ms, 0.05));
  REQUIRE(fp.fhspp_ms.has_value());
  CHECK(within(*fp.fhspp_ms, 1.5 * *want.fhspp_ms, 0.05));
}

TEST_CASE("extraction needs hop bursts") {
  VideoSpec v;
  v.bw_hz = 4e6;
  v.duration_set_s = {2e-3};
  v.inter_burst_s = 1e-3;
  const auto sc = synth_video(v, 10e6, 20e-3, 1);
  IqRecording rec{sc.samples, 10e6, 0.0, std::nullopt};
  const auto segs = sc.truth.segments();
  try {
    extract_fingerprint(rec, segs, StftConfig::with_default_hop(1024));
    FAIL("no hops accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InsufficientBursts);
  }
}

TEST_CASE("exact table row matches itself at distance zero") {
  const auto m = match_fingerprint(ref("JUMPER T14"), FingerprintDb::builtin());
  REQUIRE_FALSE(m.empty());
  CHECK(m.front().drone == "JUMPER T14");
  CHECK(m.front().distance == 0.0);
  CHECK_FALSE(m.front().flagged);
}

TEST_CASE("small perturbations keep the rank") {
  for (const auto& e : FingerprintDb::builtin().entries()) {
    if (e.flagged) continue;
    for (double k : {0.97, 1.03}) {
      RfFingerprint fp = e.fingerprint;
      fp.fhsbw_mhz *= k;
      fp.fhsdt_ms *= k;
      fp.fhsdc_ms *= k;
      if (fp.fhspp_ms) *fp.fhspp_ms *= k;
      if (fp.vtsbw_mhz) *fp.vtsbw_mhz *= k;
      const auto m = match_fingerprint(fp, FingerprintDb::builtin());
      CAPTURE(e.drone);
      REQUIRE_FALSE(m.empty());
      CHECK(m.front().drone == e.drone);
      CHECK(m.front().distance == doctest::Approx(0.03).epsilon(0.05));
    }
  }
}

TEST_CASE("pattern presence filters candidates") {
  RfFingerprint fp = ref("SIYI MK15");
  for (const auto& m : match_fingerprint(fp, FingerprintDb::builtin())) {
    CHECK_FALSE(FingerprintDb::builtin().find(m.drone)->fingerprint.fhspp_ms.has_value());
  }
  fp.fhspp_ms = 100.0;
  for (const auto& m : match_fingerprint(fp, FingerprintDb::builtin())) {
    CHECK(FingerprintDb::builtin().find(m.drone)->fingerprint.fhspp_ms.has_value());
  }
  // A full query against a table with no patterned rows finds nothing.
  const auto aperiodic_only = FingerprintDb::from_csv_string(
      std::string(kReferenceCsvHeader) + "\nA,5,10,0.64,4,-,1,1,5.8\nB,5,-,0.64,4,-,1,1,2.4\n");
  CHECK(match_fingerprint(ref("DJI FPV COMBO"), aperiodic_only).empty());
  RfFingerprint far{1000, std::nullopt, 1, 2, std::nullopt};
  CHECK(match_fingerprint(far, FingerprintDb::builtin()).empty());
}

TEST_CASE("video duration modes") {
  SUBCASE("five modes") {
    const std::vector<double> modes{1.0, 2.076, 3.0, 4.5, 6.0};
    const auto cl = measure_video_durations(durations_ms(modes, 12, 0.015, 1));
    REQUIRE(cl.size() == 5);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::abs(cl[i].center_s * 1e3 - modes[i]) <= 0.02);
      CHECK(cl[i].count == 12);
      CHECK(cl[i].min_s <= cl[i].center_s);
      CHECK(cl[i].max_s >= cl[i].center_s);
    }
  }
  SUBCASE("one mode") {
    const auto cl = measure_video_durations(durations_ms({2.0}, 20, 0.0, 2));
    REQUIRE(cl.size() == 1);
    CHECK(cl[0].center_s == doctest::Approx(2e-3));
    CHECK(cl[0].spread_s == doctest::Approx(0.0));
  }
  SUBCASE("two modes") {
    const auto cl = measure_video_durations(durations_ms({2.0, 3.0}, 10, 0.015, 3));
    REQUIRE(cl.size() == 2);
    CHECK(cl[1].center_s - cl[0].center_s == doctest::Approx(1e-3).epsilon(0.02));
  }
  SUBCASE("too few") {
    try {
      measure_video_durations(durations_ms({2.0}, 9, 0.0, 4));
      FAIL("accepted");
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::InsufficientData);
    }
  }
}
