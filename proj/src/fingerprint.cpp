#include "dronerf/fingerprint.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numeric>
#include <sstream>

#include "dronerf/error.hpp"
#include "dronerf/snr.hpp"

namespace dronerf {
namespace {

double median_of(std::vector<double> v) {
  require(!v.empty(), ErrorCode::EmptyInput, "median of an empty set");
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(trim(field));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

std::optional<double> parse_cell(const std::string& cell, bool allow_absent, std::size_t line_no,
                                 std::string_view column) {
  if (cell == "-") {
    if (allow_absent) return std::nullopt;
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": column '" + std::string(column) +
                               "' may not be absent");
  }
  double v = 0.0;
  const auto* end = cell.data() + cell.size();
  const auto [ptr, ec] = std::from_chars(cell.data(), end, v);
  if (ec != std::errc() || ptr != end || !std::isfinite(v)) {
    fail(ErrorCode::Parse, "line " + std::to_string(line_no) + ": bad number '" + cell +
                               "' in column '" + std::string(column) + "'");
  }
  return v;
}

// Largest power of two not above n.
std::size_t floor_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p * 2 <= n) p *= 2;
  return p;
}

StftConfig local_config(const StftConfig& cfg, std::uint64_t length) {
  if (length >= cfg.n_fft) return cfg;
  return StftConfig::with_default_hop(std::max<std::size_t>(16, floor_pow2(length)));
}

// Mean |X|^2 per bin over frames that sit in the gaps between segments, at
// least one frame length away from any of them.
std::vector<double> idle_floor(std::span<const Sample> x, std::span<const BurstSegment> all,
                               const StftConfig& cfg, std::size_t max_frames) {
  const std::uint64_t n = cfg.n_fft;
  std::vector<std::uint64_t> starts;
  std::uint64_t gap_lo = 0;
  auto scan_gap = [&](std::uint64_t lo, std::uint64_t hi) {
    const std::uint64_t a = lo == 0 ? 0 : lo + n;
    if (hi < n) return;
    const std::uint64_t b = hi >= x.size() ? hi : hi - n;  // frames end at or before b
    for (std::uint64_t s = a; s + n <= b; s += cfg.hop_len) starts.push_back(s);
  };
  for (const auto& seg : all) {
    if (seg.start_idx > gap_lo) scan_gap(gap_lo, seg.start_idx);
    gap_lo = std::max(gap_lo, seg.end_idx);
  }
  if (gap_lo < x.size()) scan_gap(gap_lo, x.size());
  if (starts.empty()) return {};

  const std::size_t take = std::min(max_frames, starts.size());
  FrameTransformer ft(cfg);
  std::vector<std::complex<double>> spec(n);
  std::vector<double> floor(n, 0.0);
  for (std::size_t i = 0; i < take; ++i) {
    const auto s = starts[i * starts.size() / take];
    ft.transform(x.subspan(s, n), {}, spec);
    for (std::size_t k = 0; k < n; ++k) floor[k] += std::norm(spec[k]);
  }
  for (double& v : floor) v /= static_cast<double>(take);
  return floor;
}

}  // namespace

// ---------------------------------------------------------------------------

bool RfFingerprint::is_consistent() const {
  auto ok = [](double v) { return std::isfinite(v) && v > 0.0; };
  if (!ok(fhsbw_mhz) || !ok(fhsdt_ms) || !ok(fhsdc_ms)) return false;
  if (vtsbw_mhz && !ok(*vtsbw_mhz)) return false;
  if (fhspp_ms && !ok(*fhspp_ms)) return false;
  return fhsdt_ms <= fhsdc_ms;
}

void RfFingerprint::validate() const {
  if (!is_consistent()) {
    std::ostringstream msg;
    msg << "anomalous fingerprint: fhsbw=" << fhsbw_mhz << " MHz, fhsdt=" << fhsdt_ms
        << " ms, fhsdc=" << fhsdc_ms << " ms";
    if (fhsdt_ms > fhsdc_ms) msg << " (hop duration exceeds the hop interval)";
    fail(ErrorCode::AnomalousFingerprint, msg.str());
  }
}

FingerprintDb::FingerprintDb(std::vector<ReferenceEntry> entries) : entries_(std::move(entries)) {}

FingerprintDb FingerprintDb::from_csv_string(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::size_t line_no = 0;
  bool header_seen = false;
  std::vector<ReferenceEntry> rows;
  static constexpr std::string_view kColumns[] = {"Type of UAV", "FHSBW (MHz)", "VTSBW (MHz)",
                                                  "FHSDT (ms)",  "FHSDC (ms)",  "FHSPP (ms)",
                                                  "File Size (GB)", "SNR (dB)", "MF (GHz)"};
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto cells = split_csv_line(line);
    if (!header_seen) {
      require(cells.size() == 9, ErrorCode::Schema, "reference header must have 9 columns");
      for (std::size_t i = 0; i < 9; ++i) {
        require(cells[i] == kColumns[i], ErrorCode::Schema,
                "unexpected reference column '" + cells[i] + "'");
      }
      header_seen = true;
      continue;
    }
    require(cells.size() == 9, ErrorCode::Parse,
            "line " + std::to_string(line_no) + ": expected 9 fields");
    require(!cells[0].empty(), ErrorCode::Parse, "line " + std::to_string(line_no) + ": empty name");
    ReferenceEntry e;
    e.drone = cells[0];
    e.fingerprint.fhsbw_mhz = *parse_cell(cells[1], false, line_no, kColumns[1]);
    e.fingerprint.vtsbw_mhz = parse_cell(cells[2], true, line_no, kColumns[2]);
    e.fingerprint.fhsdt_ms = *parse_cell(cells[3], false, line_no, kColumns[3]);
    e.fingerprint.fhsdc_ms = *parse_cell(cells[4], false, line_no, kColumns[4]);
    e.fingerprint.fhspp_ms = parse_cell(cells[5], true, line_no, kColumns[5]);
    e.file_size_gb = *parse_cell(cells[6], false, line_no, kColumns[6]);
    e.snr_db = *parse_cell(cells[7], false, line_no, kColumns[7]);
    e.center_freq_ghz = *parse_cell(cells[8], false, line_no, kColumns[8]);
    e.flagged = !e.fingerprint.is_consistent();
    rows.push_back(std::move(e));
  }
  require(header_seen, ErrorCode::Schema, "reference table has no header");
  return FingerprintDb(std::move(rows));
}

FingerprintDb FingerprintDb::from_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_csv_string(buf.str());
}

const FingerprintDb& FingerprintDb::builtin() {
  static const FingerprintDb db = from_csv_string(std::string(builtin_reference_csv()));
  return db;
}

const ReferenceEntry* FingerprintDb::find(std::string_view drone) const {
  for (const auto& e : entries_) {
    if (e.drone == drone) return &e;
  }
  return nullptr;
}

// ---------------------------------------------------------------------------

OccupiedBand occupied_band(const BurstSegment& seg, const StftMatrix& stft, double power_fraction,
                           std::span<const double> noise_floor) {
  require(power_fraction > 0.0 && power_fraction <= 1.0, ErrorCode::InvalidArgument,
          "power fraction must be in (0, 1]");
  require(seg.end_idx > seg.start_idx, ErrorCode::InvalidArgument, "empty segment");
  require(noise_floor.empty() || noise_floor.size() == stft.n_fft, ErrorCode::InvalidArgument,
          "noise floor length must equal n_fft");
  const std::size_t n = stft.n_fft;

  std::vector<std::size_t> frames;
  for (std::size_t m = 0; m < stft.n_frames; ++m) {
    const auto s = stft.frame_start_sample(m);
    if (s >= seg.start_idx && s + n <= seg.end_idx) frames.push_back(m);
  }
  if (frames.empty()) {
    for (std::size_t m = 0; m < stft.n_frames; ++m) {
      const auto s = stft.frame_start_sample(m);
      if (s < seg.end_idx && s + n > seg.start_idx) frames.push_back(m);
    }
  }
  require(!frames.empty(), ErrorCode::NoData, "no STFT frame covers the segment");

  std::vector<double> p(n, 0.0);
  for (auto m : frames) {
    for (std::size_t k = 0; k < n; ++k) p[k] += std::norm(stft.at(m, k));
  }
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    p[k] /= static_cast<double>(frames.size());
    if (!noise_floor.empty()) p[k] = std::max(0.0, p[k] - noise_floor[k]);
    total += p[k];
  }
  require(total > 0.0, ErrorCode::NoData, "segment carries no power above the noise floor");

  // Two pointers: p is non-negative, so the shortest window ending at hi
  // only moves right as hi grows.
  const double target = power_fraction * total * (1.0 - 1e-12);
  std::size_t best_lo = 0, best_hi = n - 1;
  double acc = 0.0;
  for (std::size_t lo = 0, hi = 0; hi < n; ++hi) {
    acc += p[hi];
    while (lo < hi && acc - p[lo] >= target) acc -= p[lo++];
    if (acc >= target && hi - lo < best_hi - best_lo) {
      best_lo = lo;
      best_hi = hi;
    }
  }
  return {stft.bin_frequency_hz(best_lo), stft.bin_frequency_hz(best_hi)};
}

double occupied_bandwidth(const BurstSegment& seg, const StftMatrix& stft, double power_fraction,
                          std::span<const double> noise_floor) {
  return occupied_band(seg, stft, power_fraction, noise_floor).width_hz();
}

std::vector<BurstSpectrum> measure_bursts(const IqRecording& rec,
                                          std::span<const BurstSegment> segments,
                                          const StftConfig& stft_cfg, const ExtractConfig& cfg) {
  stft_cfg.validate();
  const std::span<const Sample> x(rec.samples);
  const double fs = rec.sample_rate_hz;
  require(fs > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");

  std::vector<BurstSegment> sorted(segments.begin(), segments.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.start_idx < b.start_idx; });

  std::map<std::size_t, std::vector<double>> floors;
  auto floor_for = [&](const StftConfig& c) -> const std::vector<double>& {
    auto it = floors.find(c.n_fft);
    if (it == floors.end()) {
      it = floors.emplace(c.n_fft, idle_floor(x, sorted, c, cfg.max_noise_frames)).first;
    }
    return it->second;
  };

  std::vector<BurstSpectrum> out(segments.size());
  std::map<BurstClass, std::vector<double>> class_bw;
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    require(seg.end_idx <= x.size() && seg.end_idx > seg.start_idx, ErrorCode::InvalidArgument,
            "segment outside the recording");
    const StftConfig c = local_config(stft_cfg, seg.length());
    const auto m = stft(x.subspan(seg.start_idx, seg.length()), fs, c, seg.start_idx);
    out[i].bandwidth_hz = occupied_bandwidth(seg, m, cfg.power_fraction, floor_for(c));
    class_bw[seg.label].push_back(out[i].bandwidth_hz);
  }
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    const StftConfig c = local_config(stft_cfg, seg.length());
    const auto psd = welch_psd(x.subspan(seg.start_idx, seg.length()), fs, c.n_fft, 0.5);
    const double span = psd.bin_width_hz * static_cast<double>(psd.power.size());
    const double bw = std::clamp(median_of(class_bw[seg.label]), 2.0 * psd.bin_width_hz, span);
    out[i].center_hz = estimate_center_frequency(psd, bw);
  }
  return out;
}

FingerprintDetails extract_fingerprint_details(const IqRecording& rec,
                                               std::span<const BurstSegment> segments,
                                               const StftConfig& stft_cfg,
                                               const ExtractConfig& cfg) {
  const double fs = rec.sample_rate_hz;
  FingerprintDetails d;
  std::vector<BurstSegment> sorted(segments.begin(), segments.end());
  std::sort(sorted.begin(), sorted.end(),
            [](const auto& a, const auto& b) { return a.start_idx < b.start_idx; });
  const auto n_fhss = std::count_if(sorted.begin(), sorted.end(),
                                    [](const auto& s) { return s.label == BurstClass::Fhss; });
  require(static_cast<std::size_t>(n_fhss) >= std::max<std::size_t>(cfg.min_fhss_bursts, 2),
          ErrorCode::InsufficientBursts,
          "need at least " + std::to_string(cfg.min_fhss_bursts) + " fhss bursts, got " +
              std::to_string(n_fhss));

  // Every segment is measured so that the idle noise floor excludes all of them.
  const auto spectra = measure_bursts(rec, sorted, stft_cfg, cfg);
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    if (sorted[i].label == BurstClass::Fhss) {
      d.fhss.push_back(sorted[i]);
      d.fhss_spectra.push_back(spectra[i]);
    } else if (sorted[i].label == BurstClass::Video) {
      d.video.push_back(sorted[i]);
      d.video_spectra.push_back(spectra[i]);
    }
  }

  std::vector<double> bw, dur, dc, starts, centers;
  for (std::size_t i = 0; i < d.fhss.size(); ++i) {
    bw.push_back(d.fhss_spectra[i].bandwidth_hz);
    dur.push_back(d.fhss[i].duration_s);
    starts.push_back(static_cast<double>(d.fhss[i].start_idx) / fs);
    centers.push_back(d.fhss_spectra[i].center_hz);
    if (i > 0) dc.push_back(static_cast<double>(d.fhss[i].start_idx - d.fhss[i - 1].start_idx) / fs);
  }
  auto& fp = d.fingerprint;
  const double median_bw = median_of(bw);
  fp.fhsbw_mhz = median_bw / 1e6;
  fp.fhsdt_ms = median_of(dur) * 1e3;
  fp.fhsdc_ms = median_of(dc) * 1e3;
  if (starts.size() >= 4) {
    PeriodConfig pc = cfg.period;
    if (pc.label_tolerance <= 0.0) {
      pc.label_tolerance = std::max(0.05 * median_bw, 8.0 * freq_resolution(fs, stft_cfg.n_fft));
    }
    const auto p = estimate_period(starts, centers, pc);
    if (p) fp.fhspp_ms = *p * 1e3;
  }
  if (!d.video.empty()) {
    std::vector<double> vbw;
    for (const auto& s : d.video_spectra) vbw.push_back(s.bandwidth_hz);
    fp.vtsbw_mhz = median_of(vbw) / 1e6;
  }
  fp.validate();
  return d;
}

RfFingerprint extract_fingerprint(const IqRecording& rec, std::span<const BurstSegment> segments,
                                  const StftConfig& stft_cfg, const ExtractConfig& cfg) {
  return extract_fingerprint_details(rec, segments, stft_cfg, cfg).fingerprint;
}

// ---------------------------------------------------------------------------

std::vector<MatchResult> match_fingerprint(const RfFingerprint& fp, const FingerprintDb& db,
                                           const MatchTolerances& tol) {
  std::vector<MatchResult> out;
  for (const auto& e : db.entries()) {
    const auto& r = e.fingerprint;
    if (fp.fhspp_ms.has_value() != r.fhspp_ms.has_value()) continue;
    if (fp.vtsbw_mhz && !r.vtsbw_mhz) continue;

    double sum = 0.0;
    std::size_t n = 0;
    bool within = true;
    auto compare = [&](double q, double ref, double t) {
      const double rel = std::abs(q - ref) / std::abs(ref);
      if (!(rel <= t)) within = false;
      sum += rel * rel;
      ++n;
    };
    compare(fp.fhsbw_mhz, r.fhsbw_mhz, tol.fhsbw);
    compare(fp.fhsdt_ms, r.fhsdt_ms, tol.fhsdt);
    compare(fp.fhsdc_ms, r.fhsdc_ms, tol.fhsdc);
    if (fp.fhspp_ms) compare(*fp.fhspp_ms, *r.fhspp_ms, tol.fhspp);
    if (fp.vtsbw_mhz) compare(*fp.vtsbw_mhz, *r.vtsbw_mhz, tol.vtsbw);
    if (!within) continue;
    out.push_back({e.drone, std::sqrt(sum / static_cast<double>(n)), e.flagged});
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.drone < b.drone;
  });
  return out;
}

// ---------------------------------------------------------------------------

std::vector<DurationCluster> measure_video_durations(std::span<const BurstSegment> segments,
                                                     double split_gap_s, std::size_t min_segments) {
  require(split_gap_s > 0.0, ErrorCode::InvalidArgument, "split gap must be positive");
  require(segments.size() >= min_segments, ErrorCode::InsufficientData,
          "need at least " + std::to_string(min_segments) + " video segments, got " +
              std::to_string(segments.size()));
  std::vector<double> d;
  for (const auto& s : segments) d.push_back(s.duration_s);
  std::sort(d.begin(), d.end());

  std::vector<DurationCluster> out;
  std::size_t a = 0;
  while (a < d.size()) {
    std::size_t b = a + 1;
    while (b < d.size() && d[b] - d[b - 1] <= split_gap_s) ++b;
    DurationCluster c;
    c.count = b - a;
    c.min_s = d[a];
    c.max_s = d[b - 1];
    double sum = 0.0;
    for (std::size_t i = a; i < b; ++i) sum += d[i];
    c.center_s = sum / static_cast<double>(c.count);
    double var = 0.0;
    for (std::size_t i = a; i < b; ++i) var += (d[i] - c.center_s) * (d[i] - c.center_s);
    c.spread_s = std::sqrt(var / static_cast<double>(c.count));
    out.push_back(c);
    a = b;
  }
  return out;
}

}  // namespace dronerf
