#include "dronerf/spectrogram.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dronerf/error.hpp"

namespace dronerf {

double magnitude_db(std::complex<double> x) { return 20.0 * std::log10(std::abs(x) + kLogEpsilon); }

double db_to_unit(double db, const DbRange& range) {
  const double t = (db - range.floor_db) / (range.ceil_db - range.floor_db);
  return std::clamp(t, 0.0, 1.0);
}

DbRange auto_db_range(const StftMatrix& m, double dynamic_range_db) {
  require(!m.empty(), ErrorCode::EmptyInput, "cannot derive a dB range from an empty STFT");
  require(dynamic_range_db > 0.0, ErrorCode::InvalidArgument, "dynamic range must be positive");
  double peak = 0.0;
  for (const auto& x : m.bins) peak = std::max(peak, std::abs(x));
  const double ceil = 20.0 * std::log10(peak + kLogEpsilon);
  return {ceil - dynamic_range_db, ceil};
}

namespace {

void validate_range(const DbRange& range) {
  require(range.floor_db < range.ceil_db, ErrorCode::InvalidArgument,
          "db_floor must be below db_ceil");
}

// Writes one frame as column x of an image that is `stride` pixels wide.
void paint_column(std::span<const std::complex<double>> frame, const CmapSpec& cmap,
                  const DbRange& range, std::uint8_t* base, std::size_t x, std::size_t stride) {
  const std::size_t h = frame.size();
  for (std::size_t k = 0; k < h; ++k) {
    const Rgb c = cmap_lookup(cmap, db_to_unit(magnitude_db(frame[k]), range));
    std::uint8_t* p = base + 3 * ((h - 1 - k) * stride + x);
    p[0] = c.r;
    p[1] = c.g;
    p[2] = c.b;
  }
}

}  // namespace

SpectrogramImage render_spectrogram(const StftMatrix& m, const CmapSpec& cmap,
                                    const DbRange& range) {
  require(!m.empty(), ErrorCode::EmptyInput, "cannot render an empty STFT matrix");
  validate_range(range);
  SpectrogramImage img;
  img.width = m.n_frames;
  img.height = m.n_fft;
  img.db_floor = range.floor_db;
  img.db_ceil = range.ceil_db;
  img.rgb.resize(3 * img.width * img.height);
  for (std::size_t f = 0; f < m.n_frames; ++f) {
    paint_column(m.frame(f), cmap, range, img.rgb.data(), f, img.width);
  }
  return img;
}

SpectrogramImage render_spectrogram(const StftMatrix& m, const CmapSpec& cmap) {
  return render_spectrogram(m, cmap, auto_db_range(m));
}

SpectrogramImage stitch_columns(std::span<const ImageColumns> groups, std::size_t height,
                                const DbRange& range) {
  SpectrogramImage img;
  img.height = height;
  img.db_floor = range.floor_db;
  img.db_ceil = range.ceil_db;
  for (const auto& g : groups) {
    require(g.height == height || g.width == 0, ErrorCode::InvalidArgument,
            "column group height mismatch");
    require(g.first_column == img.width, ErrorCode::InvalidArgument,
            "column groups are not contiguous");
    img.width += g.width;
  }
  img.rgb.resize(3 * img.width * height);
  for (const auto& g : groups) {
    for (std::size_t y = 0; y < height && g.width > 0; ++y) {
      std::copy_n(g.rgb.data() + 3 * y * g.width, 3 * g.width,
                  img.rgb.data() + 3 * (y * img.width + g.first_column));
    }
  }
  return img;
}

StreamingStft::StreamingStft(const StftConfig& cfg, double sample_rate_hz)
    : cfg_(cfg), fs_(sample_rate_hz), xf_(cfg), bins_(cfg.n_fft) {
  require(sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  carry_.reserve(2 * cfg.n_fft);
}

void StreamingStft::push(std::span<const Sample> chunk, const FrameSink& sink) {
  require_finite(chunk);
  const std::size_t n = cfg_.n_fft;
  const std::uint64_t chunk_start = total_;
  const std::uint64_t chunk_end = total_ + chunk.size();

  while (next_start_ + n <= chunk_end) {
    std::span<const Sample> head, tail;
    if (next_start_ >= chunk_start) {
      head = chunk.subspan(static_cast<std::size_t>(next_start_ - chunk_start), n);
    } else {
      // Frame straddles the carried tail and the new chunk.
      const auto off = static_cast<std::size_t>(next_start_ - carry_start_);
      head = std::span<const Sample>(carry_).subspan(off);
      tail = chunk.first(n - head.size());
    }
    xf_.transform(head, tail, bins_);
    sink(next_frame_, bins_);
    ++next_frame_;
    next_start_ += cfg_.hop_len;
  }

  // Keep only what the next frame still needs.
  if (next_start_ >= chunk_start) {
    carry_.assign(chunk.begin() + static_cast<std::ptrdiff_t>(next_start_ - chunk_start),
                  chunk.end());
  } else {
    carry_.erase(carry_.begin(),
                 carry_.begin() + static_cast<std::ptrdiff_t>(next_start_ - carry_start_));
    carry_.insert(carry_.end(), chunk.begin(), chunk.end());
  }
  carry_start_ = next_start_;
  total_ = chunk_end;
}

StreamingSpectrogram::StreamingSpectrogram(const StftConfig& cfg, double sample_rate_hz,
                                           const CmapSpec& cmap, const DbRange& range)
    : stft_(cfg, sample_rate_hz), cmap_(cmap), range_(range) {
  validate_range(range);
  cmap.validate();
}

ImageColumns StreamingSpectrogram::push(std::span<const Sample> chunk) {
  ImageColumns cols;
  cols.first_column = stft_.frames_emitted();
  cols.height = stft_.config().n_fft;
  std::vector<std::vector<std::complex<double>>> frames;
  stft_.push(chunk, [&](std::size_t, std::span<const std::complex<double>> bins) {
    frames.emplace_back(bins.begin(), bins.end());
  });
  cols.width = frames.size();
  cols.rgb.resize(3 * cols.width * cols.height);
  for (std::size_t x = 0; x < frames.size(); ++x) {
    paint_column(frames[x], cmap_, range_, cols.rgb.data(), x, cols.width);
  }
  return cols;
}

}  // namespace dronerf
