#include "dronerf/synth.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numbers>
#include <random>

#include "dronerf/error.hpp"
#include "dronerf/fft.hpp"
#include "dronerf/snr.hpp"

namespace dronerf {
namespace {

struct Placement {
  std::uint64_t start = 0;
  std::uint64_t length = 0;
  double center_hz = 0.0;
  double bw_hz = 0.0;
  double amplitude = 1.0;
  int emitter = 0;
  BurstClass label = BurstClass::Unknown;
};

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p *= 2;
  return p;
}

std::uint64_t to_samples(double t, double fs) {
  return static_cast<std::uint64_t>(std::llround(t * fs));
}

void check_band(double center, double bw, double fs, const char* what) {
  require(bw > 0.0 && std::isfinite(bw), ErrorCode::InvalidArgument,
          std::string(what) + " bandwidth must be positive");
  require(std::abs(center) + 0.5 * bw <= 0.5 * fs * (1.0 + 1e-9), ErrorCode::InvalidArgument,
          std::string(what) + " band " + std::to_string(center) + " +- " +
              std::to_string(0.5 * bw) + " Hz does not fit in +-fs/2");
}

// Renders every placement into a fresh buffer. Each burst is a slice of the
// inverse FFT of complex Gaussian bins restricted to the band, scaled to the
// requested RMS and given raised-cosine edges.
SampleVector render(const std::vector<Placement>& placements, double fs, std::uint64_t n_total,
                    std::uint64_t seed) {
  SampleVector out(n_total, Sample(0.0f, 0.0f));
  std::map<std::size_t, FftPlan> plans;
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  for (const auto& p : placements) {
    if (p.length == 0 || p.amplitude == 0.0) continue;
    const std::size_t n_fft = next_pow2(static_cast<std::size_t>(p.length));
    auto it = plans.find(n_fft);
    if (it == plans.end()) it = plans.emplace(n_fft, FftPlan(n_fft, FftDirection::Inverse)).first;
    FftPlan& plan = it->second;
    auto in = plan.input();
    std::fill(in.begin(), in.end(), std::complex<double>(0.0, 0.0));

    const double df = fs / static_cast<double>(n_fft);
    bool any = false;
    for (std::size_t j = 0; j < n_fft; ++j) {
      const double f = (j < n_fft / 2 ? static_cast<double>(j)
                                      : static_cast<double>(j) - static_cast<double>(n_fft)) * df;
      if (std::abs(f - p.center_hz) <= 0.5 * p.bw_hz) {
        in[j] = {gauss(rng), gauss(rng)};
        any = true;
      }
    }
    if (!any) {
      // Narrower than one bin: a single tone at the nearest bin.
      auto k = static_cast<long long>(std::llround(p.center_hz / df));
      if (k < 0) k += static_cast<long long>(n_fft);
      in[static_cast<std::size_t>(k) % n_fft] = {1.0, 0.0};
    }
    plan.execute();
    const auto y = plan.output();

    double power = 0.0;
    for (std::size_t i = 0; i < p.length; ++i) power += std::norm(y[i]);
    power /= static_cast<double>(p.length);
    const double scale = power > 0.0 ? p.amplitude / std::sqrt(power) : 0.0;

    const std::size_t ramp = std::min<std::size_t>(
        kMaxRampSamples, static_cast<std::size_t>(std::llround(0.01 * static_cast<double>(p.length))));
    for (std::size_t i = 0; i < p.length && p.start + i < n_total; ++i) {
      double w = 1.0;
      const std::size_t from_end = static_cast<std::size_t>(p.length) - 1 - i;
      const std::size_t edge = std::min(i, from_end);
      if (edge < ramp) {
        w = 0.5 * (1.0 - std::cos(std::numbers::pi * (static_cast<double>(edge) + 0.5) /
                                  static_cast<double>(ramp)));
      }
      const auto v = y[i] * (scale * w);
      auto& o = out[p.start + i];
      o = Sample(static_cast<float>(o.real() + v.real()), static_cast<float>(o.imag() + v.imag()));
    }
  }
  return out;
}

Scene assemble(std::vector<Placement> placements, double fs, double total_s, std::uint64_t seed) {
  std::sort(placements.begin(), placements.end(),
            [](const auto& a, const auto& b) { return a.start < b.start; });
  Scene scene;
  scene.samples = render(placements, fs, to_samples(total_s, fs), derive_seed(seed, 2));
  scene.truth.sample_rate_hz = fs;
  scene.truth.seed = seed;
  for (const auto& p : placements) {
    scene.truth.bursts.push_back({BurstSegment::from_indices(p.start, p.start + p.length, fs, p.label),
                                  p.center_hz, p.bw_hz, p.emitter});
  }
  return scene;
}

std::vector<Placement> schedule_fhss(const FhssSpec& spec, double fs, double total_s,
                                     std::uint64_t seed) {
  const double d = spec.duty_interval_s;
  const double t = spec.hop_duration_s;
  const double t0 = spec.start_offset_s.value_or(0.5 * (d - t));
  const std::size_t k = spec.hop_freqs_hz.size();
  std::mt19937_64 rng(derive_seed(seed, 1));
  std::uniform_int_distribution<std::size_t> pick(0, k - 1);

  std::vector<Placement> out;
  auto place = [&](double start, double freq) {
    out.push_back({to_samples(start, fs), to_samples(t, fs), freq, spec.hop_bw_hz, spec.amplitude, 0,
                   BurstClass::Fhss});
  };
  if (spec.pattern_period_s) {
    const double period = *spec.pattern_period_s;
    auto n = static_cast<std::size_t>(std::max(1.0, std::ceil(period / d - 1e-9)));
    while (n > 1 && static_cast<double>(n - 1) * d + t > period - 0.1 * (d - t)) --n;
    for (std::size_t p = 0;; ++p) {
      for (std::size_t i = 0; i < n; ++i) {
        const double start = t0 + static_cast<double>(p) * period + static_cast<double>(i) * d;
        if (start + t > total_s) return out;
        place(start, spec.hop_freqs_hz[i % k]);
      }
    }
  }
  for (std::size_t i = 0;; ++i) {
    const double start = t0 + static_cast<double>(i) * d;
    if (start + t > total_s) return out;
    place(start, spec.hop_freqs_hz[pick(rng)]);
  }
}

// Video bursts placed from cursor onwards, skipping past any busy interval
// (already sorted, in samples) closer than guard.
std::vector<Placement> schedule_video(const VideoSpec& spec, double fs, double total_s,
                                      std::uint64_t seed, const std::vector<Placement>& busy,
                                      double guard_s) {
  std::mt19937_64 rng(derive_seed(seed, 3));
  std::uniform_int_distribution<std::size_t> pick(0, spec.duration_set_s.size() - 1);
  std::uniform_real_distribution<double> jitter(-spec.jitter_s, spec.jitter_s);
  const auto n_total = to_samples(total_s, fs);
  const auto guard = to_samples(guard_s, fs);

  std::vector<Placement> out;
  std::uint64_t cursor = to_samples(spec.start_offset_s.value_or(busy.empty() ? 0.0 : guard_s), fs);
  std::size_t b = 0;
  while (true) {
    double dur = spec.duration_set_s[pick(rng)];
    if (spec.jitter_s > 0.0) dur += jitter(rng);
    const std::uint64_t len = std::max<std::uint64_t>(1, to_samples(dur, fs));
    // Earliest start >= cursor that keeps guard samples clear of busy bursts.
    std::uint64_t start = cursor;
    while (b < busy.size() && busy[b].start + busy[b].length + guard <= start) ++b;
    std::size_t j = b;
    while (j < busy.size() && start + len + guard > busy[j].start) {
      start = std::max(start, busy[j].start + busy[j].length + guard);
      ++j;
    }
    if (start + len > n_total) break;
    out.push_back({start, len, spec.center_hz, spec.bw_hz, spec.amplitude, 1, BurstClass::Video});
    cursor = start + len + std::max<std::uint64_t>(1, to_samples(spec.inter_burst_s, fs));
  }
  return out;
}

}  // namespace

void FhssSpec::validate(double fs) const {
  require(fs > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  require(hop_duration_s > 0.0, ErrorCode::InvalidArgument, "hop duration must be positive");
  require(duty_interval_s >= hop_duration_s, ErrorCode::InvalidArgument,
          "hop interval must be at least the hop duration");
  require(to_samples(hop_duration_s, fs) >= 1, ErrorCode::InvalidArgument,
          "hop duration is shorter than one sample");
  if (pattern_period_s) {
    require(*pattern_period_s > hop_duration_s, ErrorCode::InvalidArgument,
            "pattern period must exceed the hop duration");
  }
  require(!hop_freqs_hz.empty(), ErrorCode::InvalidArgument, "hop frequency list is empty");
  for (double f : hop_freqs_hz) check_band(f, hop_bw_hz, fs, "hop");
  require(amplitude >= 0.0 && std::isfinite(amplitude), ErrorCode::InvalidArgument,
          "amplitude must be finite and non-negative");
}

void VideoSpec::validate(double fs) const {
  require(fs > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  check_band(center_hz, bw_hz, fs, "video");
  require(!duration_set_s.empty(), ErrorCode::InvalidArgument, "video duration set is empty");
  for (double d : duration_set_s) {
    require(d > jitter_s && d > 0.0, ErrorCode::InvalidArgument,
            "video durations must be positive and exceed the jitter");
  }
  require(jitter_s >= 0.0, ErrorCode::InvalidArgument, "jitter must be non-negative");
  require(inter_burst_s >= 0.0, ErrorCode::InvalidArgument, "inter-burst gap must be non-negative");
  require(amplitude >= 0.0 && std::isfinite(amplitude), ErrorCode::InvalidArgument,
          "amplitude must be finite and non-negative");
}

std::vector<BurstSegment> SceneTruth::segments() const {
  std::vector<BurstSegment> out;
  for (const auto& b : bursts) out.push_back(b.segment);
  return out;
}

std::vector<BurstSegment> SceneTruth::segments(BurstClass label) const {
  std::vector<BurstSegment> out;
  for (const auto& b : bursts) {
    if (b.segment.label == label) out.push_back(b.segment);
  }
  return out;
}

Scene synth_fhss(const FhssSpec& spec, double fs, double total_s, std::uint64_t seed) {
  spec.validate(fs);
  require(total_s > 0.0, ErrorCode::InvalidArgument, "scene length must be positive");
  auto placements = schedule_fhss(spec, fs, total_s, seed);
  require(placements.size() >= 4, ErrorCode::InvalidArgument,
          "scene must hold at least 4 hops, fits " + std::to_string(placements.size()));
  return assemble(std::move(placements), fs, total_s, seed);
}

Scene synth_video(const VideoSpec& spec, double fs, double total_s, std::uint64_t seed) {
  spec.validate(fs);
  require(total_s > 0.0, ErrorCode::InvalidArgument, "scene length must be positive");
  auto placements = schedule_video(spec, fs, total_s, seed, {}, 0.0);
  require(!placements.empty(), ErrorCode::InvalidArgument, "no video burst fits in the scene");
  return assemble(std::move(placements), fs, total_s, seed);
}

void add_noise_at_snr(Scene& scene, double target_snr_db, std::uint64_t seed) {
  require(std::isfinite(target_snr_db), ErrorCode::InvalidArgument, "target SNR must be finite");
  double energy = 0.0;
  std::uint64_t count = 0;
  for (const auto& b : scene.truth.bursts) {
    for (auto i = b.segment.start_idx; i < b.segment.end_idx && i < scene.samples.size(); ++i) {
      energy += std::norm(std::complex<double>(scene.samples[i]));
      ++count;
    }
  }
  require(count > 0 && energy > 0.0, ErrorCode::InvalidArgument,
          "scene has no signal power to set an SNR against");
  const double p_signal = energy / static_cast<double>(count);
  const double variance = p_signal / std::pow(10.0, target_snr_db / 10.0);
  add_complex_awgn(scene.samples, variance, seed);
  scene.truth.injected_snr_db = target_snr_db;
  scene.truth.noise_variance = variance;
}

Scene synth_scene(const SceneSpec& spec, std::uint64_t seed) {
  const double fs = spec.sample_rate_hz;
  require(fs > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  require(spec.duration_s > 0.0, ErrorCode::InvalidArgument, "scene length must be positive");
  require(spec.fhss || spec.video, ErrorCode::InvalidArgument, "scene has no emitter");
  require(spec.guard_s >= 0.0, ErrorCode::InvalidArgument, "guard must be non-negative");

  std::vector<Placement> placements;
  if (spec.fhss) {
    spec.fhss->validate(fs);
    placements = schedule_fhss(*spec.fhss, fs, spec.duration_s, seed);
  }
  if (spec.video) {
    spec.video->validate(fs);
    auto video = schedule_video(*spec.video, fs, spec.duration_s, seed, placements, spec.guard_s);
    placements.insert(placements.end(), video.begin(), video.end());
  }
  require(!placements.empty(), ErrorCode::InvalidArgument, "no burst fits in the scene");
  Scene scene = assemble(std::move(placements), fs, spec.duration_s, seed);
  if (spec.snr_db) add_noise_at_snr(scene, *spec.snr_db, derive_seed(seed, 4));
  return scene;
}

double desk_sample_rate(const RfFingerprint& fp, bool with_video) {
  double widest = fp.fhsbw_mhz;
  if (with_video && fp.vtsbw_mhz) widest = std::max(widest, *fp.vtsbw_mhz);
  for (double fs_mhz : {10.0, 12.5, 20.0, 25.0, 40.0, 50.0, 100.0}) {
    if (fs_mhz >= 1.25 * widest) return fs_mhz * 1e6;
  }
  fail(ErrorCode::InvalidArgument, "bandwidth too wide for the standard sample rates");
}

SceneSpec scene_spec_for(const RfFingerprint& fp, const FingerprintSceneOptions& opts) {
  fp.validate();
  require(opts.time_scale > 0.0, ErrorCode::InvalidArgument, "time scale must be positive");
  require(opts.n_hop_freqs >= 1, ErrorCode::InvalidArgument, "need at least one hop frequency");
  const double a = opts.time_scale;
  const bool video = opts.with_video && fp.vtsbw_mhz.has_value();

  SceneSpec s;
  s.sample_rate_hz = desk_sample_rate(fp, video);
  s.snr_db = opts.snr_db;
  s.guard_s = 0.1e-3 * a;

  FhssSpec f;
  f.hop_bw_hz = fp.fhsbw_mhz * 1e6;
  f.hop_duration_s = fp.fhsdt_ms * 1e-3 * a;
  f.duty_interval_s = fp.fhsdc_ms * 1e-3 * a;
  if (fp.fhspp_ms) f.pattern_period_s = *fp.fhspp_ms * 1e-3 * a;
  const double half = 0.5 * s.sample_rate_hz - 0.5 * f.hop_bw_hz - 0.05 * s.sample_rate_hz;
  if (opts.n_hop_freqs == 1 || half <= 0.0) {
    f.hop_freqs_hz = {0.0};
  } else {
    for (std::size_t i = 0; i < opts.n_hop_freqs; ++i) {
      f.hop_freqs_hz.push_back(-half + 2.0 * half * static_cast<double>(i) /
                                           static_cast<double>(opts.n_hop_freqs - 1));
    }
  }

  const double d = f.duty_interval_s;
  if (f.pattern_period_s) {
    s.duration_s = std::max(2.6 * *f.pattern_period_s, 12.0 * d) + 2.0 * d;
  } else {
    s.duration_s = 25.0 * d;
  }

  if (video) {
    // Video frames longer than the hops (so duration separates the classes)
    // and short enough to fit the idle part of a hop slot.
    const double d1 = std::max(2e-3 * a, 1.3 * f.hop_duration_s);
    const double room = d - f.hop_duration_s - 2.0 * s.guard_s;
    const double jitter = 0.0075 * d1;
    if (room >= d1 + jitter) {
      VideoSpec v;
      v.bw_hz = *fp.vtsbw_mhz * 1e6;
      v.center_hz = 0.0;
      v.duration_set_s = {d1};
      if (room >= 1.5 * d1 + jitter) v.duration_set_s.push_back(1.5 * d1);
      v.jitter_s = jitter;
      v.inter_burst_s = 1e-3 * a;
      s.video = v;
    }
  }
  s.fhss = f;
  return s;
}

}  // namespace dronerf
