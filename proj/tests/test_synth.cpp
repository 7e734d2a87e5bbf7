#include <doctest.h>

#include <set>

#include "dronerf/error.hpp"
#include "dronerf/fingerprint.hpp"
#include "dronerf/snr.hpp"
#include "dronerf/synth.hpp"
#include "support.hpp"

using namespace dronerf;

namespace {

FhssSpec fpv_hops() {
  FhssSpec f;
  f.hop_bw_hz = 5e6;
  f.hop_duration_s = 0.64e-3;
  f.duty_interval_s = 4e-3;
  f.pattern_period_s = 38.3e-3;
  f.hop_freqs_hz = {-3e6, -1e6, 1e6, 3e6};
  return f;
}

VideoSpec video(std::vector<double> durations, double jitter = 0.0) {
  VideoSpec v;
  v.bw_hz = 4e6;
  v.center_hz = -1e6;
  v.duration_set_s = std::move(durations);
  v.jitter_s = jitter;
  v.inter_burst_s = 1e-3;
  return v;
}

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::Io;
}

}  // namespace

TEST_CASE("hop schedule repeats with the pattern period") {
  const double fs = 12.5e6;
  const auto sc = synth_fhss(fpv_hops(), fs, 0.12, 1);
  const auto& b = sc.truth.bursts;
  // ceil(38.3 / 4) = 10 slots; the tenth ends at 36.64 ms, inside the period.
  const std::size_t per = 10;
  REQUIRE(b.size() >= 2 * per + 1);
  for (std::size_t i = 0; i + per < b.size(); ++i) {
    const double dt = static_cast<double>(b[i + per].segment.start_idx - b[i].segment.start_idx) / fs;
    CHECK(dt == doctest::Approx(38.3e-3).epsilon(1e-4));
    CHECK(b[i + per].center_hz == b[i].center_hz);
  }
  for (std::size_t i = 1; i < per; ++i) {
    const double dt = static_cast<double>(b[i].segment.start_idx - b[i - 1].segment.start_idx) / fs;
    CHECK(dt == doctest::Approx(4e-3).epsilon(1e-4));
  }
  for (const auto& t : b) {
    CHECK(t.emitter == 0);
    CHECK(t.segment.label == BurstClass::Fhss);
    CHECK(t.segment.length() == 8000);
  }
}

TEST_CASE("random hop order without a period") {
  auto f = fpv_hops();
  f.pattern_period_s.reset();
  const auto sc = synth_fhss(f, 12.5e6, 0.2, 5);
  std::set<double> used;
  for (const auto& t : sc.truth.bursts) used.insert(t.center_hz);
  CHECK(used.size() == 4);
  CHECK(sc.truth.bursts.size() == 50);
}

TEST_CASE("burst spectrum matches the requested band") {
  const double fs = 20e6;
  auto f = fpv_hops();
  f.hop_freqs_hz = {2e6};
  const auto sc = synth_fhss(f, fs, 0.05, 2);
  IqRecording rec{sc.samples, fs, 0.0, std::nullopt};
  const auto m = stft(rec.samples, fs, StftConfig::with_default_hop(1024));
  for (const auto& t : sc.truth.bursts) {
    const auto band = occupied_band(t.segment, m);
    CHECK(std::abs(band.width_hz() / 5e6 - 1.0) <= 0.05);
    CHECK(std::abs(band.center_hz() - 2e6) <= 2 * m.freq_resolution_hz);
  }
}

TEST_CASE("burst RMS and silence between bursts") {
  auto f = fpv_hops();
  f.amplitude = 3.0;
  const auto sc = synth_fhss(f, 12.5e6, 0.05, 3);
  const auto& b = sc.truth.bursts;
  for (const auto& t : b) {
    const double p = test::mean_power(sc.samples, t.segment.start_idx, t.segment.end_idx);
    CHECK(p == doctest::Approx(9.0).epsilon(0.02));
  }
  for (std::size_t i = 1; i < b.size(); ++i) {
    CHECK(test::mean_power(sc.samples, b[i - 1].segment.end_idx, b[i].segment.start_idx) == 0.0);
  }
  // Edges start near zero.
  CHECK(std::abs(sc.samples[b[0].segment.start_idx]) < 0.5f);
}

TEST_CASE("zero amplitude renders silence") {
  auto f = fpv_hops();
  f.amplitude = 0.0;
  const auto sc = synth_fhss(f, 12.5e6, 0.05, 3);
  CHECK_FALSE(sc.truth.bursts.empty());
  for (auto s : sc.samples) REQUIRE(s == Sample(0.0f, 0.0f));
}

TEST_CASE("video durations without jitter are exact") {
  const double fs = 10e6;
  const auto sc = synth_video(video({2e-3}), fs, 0.05, 4);
  REQUIRE(sc.truth.bursts.size() >= 10);
  for (const auto& t : sc.truth.bursts) {
    CHECK(t.segment.length() == 20000);
    CHECK(t.emitter == 1);
    CHECK(t.segment.label == BurstClass::Video);
  }
}

TEST_CASE("video durations pick from the set within jitter") {
  const double fs = 10e6;
  const auto sc = synth_video(video({2e-3, 3e-3}, 0.02e-3), fs, 0.2, 5);
  std::size_t near2 = 0, near3 = 0;
  for (const auto& t : sc.truth.bursts) {
    const double d = t.segment.duration_s;
    if (std::abs(d - 2e-3) <= 0.02e-3 + 1e-7) ++near2;
    else if (std::abs(d - 3e-3) <= 0.02e-3 + 1e-7) ++near3;
    else FAIL("duration " << d);
  }
  CHECK(near2 > 5);
  CHECK(near3 > 5);
}

TEST_CASE("mixed scene keeps emitters apart") {
  SceneSpec s;
  s.sample_rate_hz = 12.5e6;
  s.duration_s = 0.2;
  s.fhss = fpv_hops();
  s.video = video({2e-3, 2.5e-3}, 0.01e-3);
  const auto sc = synth_scene(s, 7);
  const auto& b = sc.truth.bursts;
  const auto guard = static_cast<std::uint64_t>(s.guard_s * s.sample_rate_hz) - 1;
  std::size_t n_video = 0;
  for (std::size_t i = 1; i < b.size(); ++i) {
    REQUIRE(b[i - 1].segment.start_idx <= b[i].segment.start_idx);
    CHECK(b[i - 1].segment.end_idx <= b[i].segment.start_idx);
    if (b[i].emitter != b[i - 1].emitter) {
      CHECK(b[i].segment.start_idx - b[i - 1].segment.end_idx >= guard);
    }
  }
  for (const auto& t : b) n_video += t.emitter == 1;
  CHECK(n_video > 10);
  CHECK(sc.truth.segments(BurstClass::Video).size() == n_video);
  CHECK(sc.truth.segments().size() == b.size());
  CHECK(b.back().segment.end_idx <= sc.samples.size());
}

TEST_CASE("noise at the injected SNR") {
  SceneSpec s;
  s.sample_rate_hz = 12.5e6;
  s.duration_s = 0.1;
  s.fhss = fpv_hops();
  SUBCASE("0 dB doubles the in-burst power") {
    s.snr_db = 0.0;
    const auto sc = synth_scene(s, 8);
    const auto segs = sc.truth.segments();
    const auto est = estimate_snr(sc.samples, segs);
    CHECK(est.p_signal_plus_noise / est.p_noise == doctest::Approx(2.0).epsilon(0.03));
    CHECK(sc.truth.injected_snr_db == 0.0);
    CHECK(sc.truth.noise_variance == doctest::Approx(est.p_noise).epsilon(0.02));
  }
  SUBCASE("calibration over many seeds") {
    for (double target : {-5.0, 10.0, 20.0, 35.0}) {
      s.snr_db = target;
      for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto sc = synth_scene(s, seed);
        const auto segs = sc.truth.segments();
        CHECK(std::abs(estimate_snr(sc.samples, segs).snr_db - target) <= 0.2);
      }
    }
  }
}

TEST_CASE("synthesis is deterministic per seed") {
  auto s = scene_spec_for(FingerprintDb::builtin().find("DJI FPV COMBO")->fingerprint);
  const auto a = synth_scene(s, 42);
  const auto b = synth_scene(s, 42);
  const auto c = synth_scene(s, 43);
  CHECK(a.samples == b.samples);
  CHECK(a.truth.segments() == b.truth.segments());
  CHECK(a.samples != c.samples);
}

TEST_CASE("invalid scene specs") {
  const double fs = 10e6;
  auto f = fpv_hops();
  f.hop_freqs_hz = {4e6};  // 4 + 2.5 MHz is past Nyquist
  CHECK(code_of([&] { synth_fhss(f, fs, 0.1, 1); }) == ErrorCode::InvalidArgument);
  f = fpv_hops();
  f.hop_bw_hz = 12e6;
  CHECK(code_of([&] { synth_fhss(f, fs, 0.1, 1); }) == ErrorCode::InvalidArgument);
  f = fpv_hops();
  f.hop_duration_s = 5e-3;
  CHECK(code_of([&] { synth_fhss(f, fs, 0.1, 1); }) == ErrorCode::InvalidArgument);
  f = fpv_hops();
  f.hop_freqs_hz.clear();
  CHECK(code_of([&] { synth_fhss(f, fs, 0.1, 1); }) == ErrorCode::InvalidArgument);
  CHECK(code_of([&] { synth_fhss(fpv_hops(), fs, 0.01, 1); }) == ErrorCode::InvalidArgument);
  auto v = video({});
  CHECK(code_of([&] { synth_video(v, fs, 0.1, 1); }) == ErrorCode::InvalidArgument);
  v = video({2e-3}, 3e-3);
  CHECK(code_of([&] { synth_video(v, fs, 0.1, 1); }) == ErrorCode::InvalidArgument);
  SceneSpec s;
  s.sample_rate_hz = fs;
  s.duration_s = 0.1;
  CHECK(code_of([&] { synth_scene(s, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("sample rate ladder") {
  const auto& db = FingerprintDb::builtin();
  CHECK(desk_sample_rate(db.find("DJI FPV COMBO")->fingerprint, true) == 12.5e6);
  CHECK(desk_sample_rate(db.find("DJI FPV COMBO")->fingerprint, false) == 10e6);
  CHECK(desk_sample_rate(db.find("JUMPER T14")->fingerprint, false) == 12.5e6);
  CHECK(desk_sample_rate(db.find("WFLY ET16S")->fingerprint, false) == 50e6);
  for (const auto& e : db.entries()) {
    if (e.flagged) continue;
    const auto spec = scene_spec_for(e.fingerprint);
    CAPTURE(e.drone);
    CHECK(spec.fhss.has_value());
    CHECK_NOTHROW(spec.fhss->validate(spec.sample_rate_hz));
    if (spec.video) CHECK_NOTHROW(spec.video->validate(spec.sample_rate_hz));
  }
}
