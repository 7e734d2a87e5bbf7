#include "dronerf/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <fstream>
#include <cmath>
#include <filesystem>
#include <iomanip>
#include <limits>
#include <optional>
#include <sstream>

#include "dronerf/analysis.hpp"
#include "dronerf/colormap.hpp"
#include "dronerf/error.hpp"
#include "dronerf/image_io.hpp"
#include "dronerf/iq_io.hpp"
#include "dronerf/json_io.hpp"
#include "dronerf/snr.hpp"
#include "dronerf/spectrogram.hpp"
#include "dronerf/synth.hpp"

namespace dronerf {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr std::size_t kDefaultChunk = 1 << 18;

struct InputOptions {
  std::string path;
  std::optional<double> sample_rate_hz;
  std::optional<double> center_freq_hz;
  bool big_endian = false;

  ByteOrder order() const { return big_endian ? ByteOrder::Big : ByteOrder::Little; }
};

void add_input_options(CLI::App* app, InputOptions& in) {
  app->add_option("input", in.path, "Raw interleaved fp32 I/Q file")->required();
  app->add_option("--fs", in.sample_rate_hz, "Sample rate in Hz (overrides the sidecar)");
  app->add_option("--center-freq", in.center_freq_hz, "RF centre in Hz (overrides the sidecar)");
  app->add_flag("--big-endian", in.big_endian, "Samples are big-endian");
}

// Sidecar metadata with command-line overrides applied.
RecordingMetadata resolve_metadata(const InputOptions& in) {
  const fs::path path(in.path);
  require(fs::exists(path), ErrorCode::Io, "no such file: " + in.path);
  RecordingMetadata meta;
  const auto side = sidecar_path(path);
  if (fs::exists(side)) {
    meta = parse_metadata_xml(side);
  } else {
    require(in.sample_rate_hz.has_value(), ErrorCode::InvalidArgument,
            "no sidecar " + side.string() + "; pass --fs");
  }
  if (in.sample_rate_hz) meta.sample_rate_hz = *in.sample_rate_hz;
  if (in.center_freq_hz) meta.center_freq_hz = *in.center_freq_hz;
  require(meta.sample_rate_hz > 0.0 && std::isfinite(meta.sample_rate_hz),
          ErrorCode::InvalidArgument, "sample rate must be positive");
  return meta;
}

IqRecording load_input(const InputOptions& in) {
  const auto meta = resolve_metadata(in);
  IqRecording rec;
  rec.samples = read_iq(in.path, in.order());
  rec.sample_rate_hz = meta.sample_rate_hz;
  rec.center_freq_hz = meta.center_freq_hz.value_or(0.0);
  rec.metadata = meta;
  return rec;
}

json nullable(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }
json nullable(const std::optional<std::string>& v) { return v ? json(*v) : json(nullptr); }

// ---------------------------------------------------------------------------

int cmd_info(const InputOptions& in, std::ostream& out) {
  const auto meta = resolve_metadata(in);
  IqChunkReader reader(in.path, kDefaultChunk, in.order());
  double energy = 0.0;
  double peak = 0.0;
  std::uint64_t non_finite = 0;
  while (auto chunk = reader.next()) {
    for (const auto& s : *chunk) {
      if (!std::isfinite(s.real()) || !std::isfinite(s.imag())) {
        ++non_finite;
        continue;
      }
      const double p = std::norm(std::complex<double>(s));
      energy += p;
      peak = std::max(peak, p);
    }
  }
  const auto n = reader.samples_read();
  const auto finite = n - non_finite;
  json j = {{"path", in.path},
            {"num_samples", n},
            {"sample_rate_hz", meta.sample_rate_hz},
            {"duration_s", static_cast<double>(n) / meta.sample_rate_hz},
            {"center_freq_hz", nullable(meta.center_freq_hz)},
            {"uav_type", nullable(meta.uav_type)},
            {"gain_db", nullable(meta.gain_db)},
            {"source_file", nullable(meta.source_file)},
            {"mean_power", finite ? json(energy / static_cast<double>(finite)) : json(nullptr)},
            {"peak_power", finite ? json(peak) : json(nullptr)},
            {"non_finite_samples", non_finite}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SpectrogramOptions {
  InputOptions in;
  std::string output;
  std::size_t n_fft = 512;
  std::optional<std::size_t> hop;
  std::string cmap = "parula";
  std::optional<double> db_floor;
  std::optional<double> db_ceil;
  std::size_t chunk = kDefaultChunk;
};

int cmd_spectrogram(const SpectrogramOptions& o, std::ostream& out, std::ostream& err) {
  const auto meta = resolve_metadata(o.in);
  const auto name = parse_cmap_name(o.cmap);
  require(name.has_value(), ErrorCode::InvalidArgument,
          "unknown colormap '" + o.cmap + "' (parula, hot, hsv, autumn)");
  require(o.chunk > 0, ErrorCode::InvalidArgument, "chunk size must be positive");
  StftConfig cfg = StftConfig::with_default_hop(o.n_fft);
  if (o.hop) cfg.hop_len = *o.hop;
  cfg.validate();
  const auto& cmap = colormap(*name);

  DbRange range;
  if (o.db_floor && o.db_ceil) {
    range = {*o.db_floor, *o.db_ceil};
  } else {
    // First pass finds the loudest bin so the image can be coloured in one
    // further streaming pass.
    err << "spectrogram: scanning for the dB range\n";
    StreamingStft scan(cfg, meta.sample_rate_hz);
    double loudest = -std::numeric_limits<double>::infinity();
    IqChunkReader reader(o.in.path, o.chunk, o.in.order());
    while (auto chunk = reader.next()) {
      scan.push(*chunk, [&](std::size_t, std::span<const std::complex<double>> bins) {
        for (const auto& b : bins) loudest = std::max(loudest, magnitude_db(b));
      });
    }
    require(scan.frames_emitted() > 0, ErrorCode::InsufficientData,
            "recording is shorter than one " + std::to_string(cfg.n_fft) + "-sample frame");
    range.ceil_db = o.db_ceil.value_or(loudest);
    range.floor_db = o.db_floor.value_or(range.ceil_db - kDefaultDynamicRangeDb);
  }
  require(std::isfinite(range.floor_db) && std::isfinite(range.ceil_db) &&
              range.ceil_db > range.floor_db,
          ErrorCode::InvalidArgument, "dB ceiling must be above the floor");

  StreamingSpectrogram engine(cfg, meta.sample_rate_hz, cmap, range);
  std::vector<ImageColumns> groups;
  IqChunkReader reader(o.in.path, o.chunk, o.in.order());
  while (auto chunk = reader.next()) {
    auto cols = engine.push(*chunk);
    if (cols.width > 0) groups.push_back(std::move(cols));
  }
  require(engine.columns_emitted() > 0, ErrorCode::InsufficientData,
          "recording is shorter than one " + std::to_string(cfg.n_fft) + "-sample frame");
  const auto img = stitch_columns(groups, engine.height(), range);

  const fs::path path(o.output);
  const auto ext = path.extension().string();
  if (ext == ".ppm" || ext == ".PPM") {
    write_ppm(img, path);
  } else {
    write_png(img, path);
  }
  err << "spectrogram: wrote " << img.width << "x" << img.height << " image\n";
  json j = {{"output", o.output},
            {"width", img.width},
            {"height", img.height},
            {"n_fft", cfg.n_fft},
            {"hop_len", cfg.hop_len},
            {"colormap", std::string(cmap_display_name(*name))},
            {"db_floor", range.floor_db},
            {"db_ceil", range.ceil_db}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AdjustOptions {
  InputOptions in;
  std::string targets;
  std::vector<std::string> segments;
  std::optional<double> measured_db;
  std::uint64_t seed = 1;
  std::string out_dir = ".";
};

double parse_double(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  require(used == text.size() && !text.empty() && std::isfinite(v), ErrorCode::InvalidArgument,
          "bad " + what + " '" + text + "'");
  return v;
}

// "lo:hi:step" or a comma-separated list.
std::vector<double> parse_targets(const std::string& text) {
  require(!text.empty(), ErrorCode::InvalidArgument, "no SNR targets given");
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    require(parts.size() == 3, ErrorCode::InvalidArgument, "targets range must be lo:hi:step");
    return sweep_targets(parse_double(parts[0], "target"), parse_double(parts[1], "target"),
                         parse_double(parts[2], "target step"));
  }
  std::vector<double> out;
  std::stringstream ss(text);
  std::string p;
  while (std::getline(ss, p, ',')) out.push_back(parse_double(p, "target"));
  return out;
}

BurstSegment parse_segment(const std::string& text, double fs, std::uint64_t n) {
  const auto colon = text.find(':');
  require(colon != std::string::npos, ErrorCode::InvalidArgument,
          "segment must be START:END sample indices, got '" + text + "'");
  auto index = [&](const std::string& s) {
    std::uint64_t v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    require(ec == std::errc() && ptr == s.data() + s.size() && !s.empty(),
            ErrorCode::InvalidArgument, "bad sample index '" + s + "'");
    return v;
  };
  const auto a = index(text.substr(0, colon));
  const auto b = index(text.substr(colon + 1));
  require(a < b && b <= n, ErrorCode::InvalidArgument,
          "segment " + text + " must satisfy start < end <= " + std::to_string(n));
  return BurstSegment::from_indices(a, b, fs);
}

std::string target_tag(double db) {
  std::ostringstream s;
  s << std::showpos << std::setprecision(6) << db;
  return s.str();
}

int cmd_adjust_snr(const AdjustOptions& o, std::ostream& out, std::ostream& err) {
  const auto targets = parse_targets(o.targets);
  const IqRecording rec = load_input(o.in);
  require_finite(rec.samples);

  std::vector<BurstSegment> segs;
  for (const auto& s : o.segments) segs.push_back(parse_segment(s, rec.sample_rate_hz, rec.samples.size()));
  if (segs.empty()) {
    err << "adjust-snr: no --segment given, detecting bursts\n";
    segs = detect_bursts(rec.samples, rec.sample_rate_hz);
    require(!segs.empty(), ErrorCode::InsufficientData, "no bursts detected; pass --segment");
  }
  double measured = 0.0;
  if (o.measured_db) {
    measured = *o.measured_db;
  } else {
    const auto est = estimate_snr(rec.samples, segs);
    require(est.valid, ErrorCode::InsufficientData,
            "measured SNR is undefined (no excess power in the segments)");
    measured = est.snr_db;
  }
  for (double t : targets) {
    if (t > measured) {
      fail(ErrorCode::CannotRaiseSnr, "target " + target_tag(t) + " dB is above the measured " +
                                          target_tag(measured) + " dB");
    }
  }

  const fs::path dir(o.out_dir);
  fs::create_directories(dir);
  const auto stem = fs::path(o.in.path).stem().string();
  json outputs = json::array();
  const auto p_noise = estimate_snr(rec.samples, segs).p_noise;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    const double variance = awgn_variance_for_target(p_noise, measured, targets[i]);
    IqRecording adj = adjust_snr_awgn(rec, measured, targets[i], segs, derive_seed(o.seed, i));
    const auto path = dir / (stem + "_snr" + target_tag(targets[i]) + "dB.iq");
    write_iq(adj, path);
    RecordingMetadata meta = *rec.metadata;
    meta.source_file = fs::path(o.in.path).filename().string();
    write_metadata_xml(meta, sidecar_path(path));
    err << "adjust-snr: " << path.string() << "\n";
    outputs.push_back({{"target_db", targets[i]}, {"noise_variance", variance}, {"path", path.string()}});
  }
  json segments = json::array();
  for (const auto& s : segs) segments.push_back(to_json(s));
  json j = {{"input", o.in.path},
            {"measured_snr_db", measured},
            {"seed", o.seed},
            {"segments", std::move(segments)},
            {"outputs", std::move(outputs)}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct AnalyzeOptions {
  InputOptions in;
  std::size_t n_fft = 1024;
  double threshold = 4.0;
  std::size_t short_win = 64;
  std::size_t long_win = 4096;
  std::size_t min_gap = 256;
  std::size_t min_duration = 128;
  std::size_t top = 3;
  std::string db_path;
  std::string report_path;
  std::string jsonl_path;
};

int cmd_analyze(const AnalyzeOptions& o, std::ostream& out, std::ostream& err) {
  const IqRecording rec = load_input(o.in);
  AnalysisConfig cfg;
  cfg.detector = {o.short_win, o.long_win, o.threshold, o.min_gap, o.min_duration};
  cfg.detector.validate();
  cfg.stft = StftConfig::with_default_hop(o.n_fft);
  cfg.stft.validate();
  cfg.top_k = o.top;
  const FingerprintDb db = o.db_path.empty() ? FingerprintDb::builtin() : FingerprintDb::from_csv(o.db_path);

  err << "analyze: " << rec.samples.size() << " samples at " << rec.sample_rate_hz << " Hz\n";
  AnalysisReport report = analyze_recording(rec, db, cfg);
  report.input = o.in.path;
  err << "analyze: " << report.bursts.size() << " bursts, "
      << (report.fingerprint ? "fingerprint extracted" : "no fingerprint") << "\n";

  const json j = to_json(report);
  if (!o.report_path.empty()) write_text_file(o.report_path, j.dump(2) + "\n");
  if (!o.jsonl_path.empty()) {
    std::vector<BurstSegment> segs;
    for (const auto& b : report.bursts) segs.push_back(b.segment);
    write_text_file(o.jsonl_path, to_json_lines(segs));
  }
  out << j.dump(2) << '\n';
  return kExitOk;
}

// ---------------------------------------------------------------------------

struct SynthOptions {
  std::string spec_path;
  std::string output;
  std::uint64_t seed = 1;
};

int cmd_synth(const SynthOptions& o, std::ostream& out, std::ostream& err) {
  const json spec_json = read_json_file(o.spec_path);
  const SceneSpec spec = scene_spec_from_json(spec_json, FingerprintDb::builtin());
  err << "synth: " << spec.duration_s << " s at " << spec.sample_rate_hz << " Hz\n";
  const Scene scene = synth_scene(spec, o.seed);

  fs::path iq(o.output);
  if (iq.extension() != ".iq") iq += ".iq";
  if (iq.has_parent_path()) fs::create_directories(iq.parent_path());
  write_iq(scene.samples, iq);
  RecordingMetadata meta;
  meta.sample_rate_hz = spec.sample_rate_hz;
  meta.center_freq_hz = 0.0;
  if (spec_json.contains("drone")) meta.uav_type = spec_json.at("drone").get<std::string>();
  meta.source_file = fs::path(o.spec_path).filename().string();
  write_metadata_xml(meta, sidecar_path(iq));
  fs::path truth = iq;
  truth.replace_extension(".truth.json");
  write_text_file(truth, to_json(scene.truth).dump(2) + "\n");

  json j = {{"iq", iq.string()},
            {"xml", sidecar_path(iq).string()},
            {"truth", truth.string()},
            {"num_samples", scene.samples.size()},
            {"bursts", scene.truth.bursts.size()},
            {"seed", o.seed}};
  out << j.dump(2) << '\n';
  return kExitOk;
}

// --config FILE holds flat `key = value` lines (# starts a comment). A key
// names a long option of the chosen subcommand and is ignored by the others;
// repeat a key for repeatable options. Values only fill options the command
// line left unset, and the output-directory environment variable beats the
// file.
std::vector<std::string> apply_config(CLI::App& app, const std::vector<std::string>& args) {
  std::string path;
  for (std::size_t i = 0; i < args.size(); ++i) {
    if (args[i] == "--config" && i + 1 < args.size()) path = args[i + 1];
    if (args[i].rfind("--config=", 0) == 0) path = args[i].substr(9);
  }
  if (path.empty()) return args;

  CLI::App* sub = nullptr;
  for (const auto& a : args) {
    if (!a.empty() && a[0] != '-') {
      sub = app.get_subcommand_no_throw(a);
      if (sub) break;
    }
  }
  std::ifstream in(path);
  require(static_cast<bool>(in), ErrorCode::Io, "cannot open config " + path);
  if (!sub) return args;

  auto given = [&](const std::string& key) {
    const std::string flag = "--" + key;
    return std::any_of(args.begin(), args.end(), [&](const std::string& a) {
      return a == flag || a.rfind(flag + "=", 0) == 0;
    });
  };
  auto trim = [](std::string s) {
    const auto b = s.find_first_not_of(" \t\r");
    const auto e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
  };

  std::vector<std::string> extra;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    require(eq != std::string::npos, ErrorCode::Parse,
            path + ":" + std::to_string(line_no) + ": expected key = value");
    const auto key = trim(line.substr(0, eq));
    const auto value = trim(line.substr(eq + 1));
    const auto* opt = sub->get_option_no_throw("--" + key);
    if (opt == nullptr || given(key)) continue;
    if (key == "out-dir" && std::getenv("DRONERF_OUT_DIR") != nullptr) continue;
    if (opt->get_type_size() == 0) {
      if (value == "true" || value == "1" || value == "yes") extra.push_back("--" + key);
      continue;
    }
    extra.push_back("--" + key + "=" + value);
  }
  std::vector<std::string> out = args;
  out.insert(out.end(), extra.begin(), extra.end());
  return out;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Drone RF burst analysis toolkit", "dronerf"};
  std::string config_path;
  app.add_option("--config", config_path, "Flat key=value file of option defaults");
  app.set_version_flag("--version", "dronerf 0.1.0");
  app.require_subcommand(1);
  app.fallthrough();

  InputOptions info_in;
  auto* info = app.add_subcommand("info", "Summarise a recording");
  add_input_options(info, info_in);

  SpectrogramOptions sp;
  auto* spec = app.add_subcommand("spectrogram", "Render a spectrogram image (streaming)");
  add_input_options(spec, sp.in);
  spec->add_option("-o,--out", sp.output, "Output image (.png or .ppm)")->required();
  spec->add_option("--nfft", sp.n_fft, "FFT length")->capture_default_str();
  spec->add_option("--hop", sp.hop, "Hop length (default nfft/2)");
  spec->add_option("--cmap", sp.cmap, "parula, hot, hsv or autumn")->capture_default_str();
  spec->add_option("--db-floor", sp.db_floor, "Colour scale floor in dB");
  spec->add_option("--db-ceil", sp.db_ceil, "Colour scale ceiling in dB");
  spec->add_option("--chunk", sp.chunk, "Samples read per chunk")->capture_default_str();

  AdjustOptions adj;
  auto* adjust = app.add_subcommand("adjust-snr", "Write copies degraded to lower SNRs");
  add_input_options(adjust, adj.in);
  adjust->add_option("--targets", adj.targets, "lo:hi:step or a comma list, in dB")->required();
  adjust->add_option("--segment", adj.segments, "Burst as START:END sample indices (repeatable)");
  adjust->add_option("--measured", adj.measured_db, "Measured SNR in dB (default: estimate)");
  adjust->add_option("--seed", adj.seed, "Noise seed")->capture_default_str();
  adjust->add_option("--out-dir", adj.out_dir, "Output directory")
      ->envname("DRONERF_OUT_DIR")
      ->capture_default_str();

  AnalyzeOptions an;
  auto* analyze = app.add_subcommand("analyze", "Detect, classify, fingerprint and match");
  add_input_options(analyze, an.in);
  analyze->add_option("--nfft", an.n_fft, "FFT length for spectral measurements")->capture_default_str();
  analyze->add_option("--threshold", an.threshold, "Detector threshold ratio")->capture_default_str();
  analyze->add_option("--short-win", an.short_win, "Detector short window")->capture_default_str();
  analyze->add_option("--long-win", an.long_win, "Detector long window")->capture_default_str();
  analyze->add_option("--min-gap", an.min_gap, "Merge bursts closer than this")->capture_default_str();
  analyze->add_option("--min-duration", an.min_duration, "Drop bursts shorter than this")
      ->capture_default_str();
  analyze->add_option("--top", an.top, "Number of matches to report")->capture_default_str();
  analyze->add_option("--db", an.db_path, "Reference table CSV (default: built in)");
  analyze->add_option("--report", an.report_path, "Also write the report here");
  analyze->add_option("--jsonl", an.jsonl_path, "Write detected bursts as JSON lines");

  SynthOptions sy;
  auto* synth = app.add_subcommand("synth", "Synthesise a scene from a JSON spec");
  synth->add_option("spec", sy.spec_path, "Scene spec JSON")->required();
  synth->add_option("-o,--out", sy.output, "Output .iq path")->required();
  synth->add_option("--seed", sy.seed, "Random seed")->capture_default_str();

  std::vector<std::string> args(argv + 1, argv + argc);
  try {
    args = apply_config(app, args);
    std::reverse(args.begin(), args.end());
    app.parse(std::move(args));
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (*info) return cmd_info(info_in, out);
    if (*spec) return cmd_spectrogram(sp, out, err);
    if (*adjust) return cmd_adjust_snr(adj, out, err);
    if (*analyze) return cmd_analyze(an, out, err);
    if (*synth) return cmd_synth(sy, out, err);
  } catch (const Error& e) {
    err << "error [" << to_string(e.code()) << "]: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "internal error: " << e.what() << '\n';
    return kExitInternal;
  }
  return kExitUsage;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  std::vector<const char*> argv;
  argv.push_back("dronerf");
  for (const auto& a : args) argv.push_back(a.c_str());
  return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace dronerf
