#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dronerf/colormap.hpp"
#include "dronerf/dsp.hpp"
#include "dronerf/sample.hpp"

namespace dronerf {

// Added to |X| before the log so silent bins map to a finite level.
inline constexpr double kLogEpsilon = 1e-12;
inline constexpr double kDefaultDynamicRangeDb = 80.0;

struct DbRange {
  double floor_db = -120.0;
  double ceil_db = 0.0;
};

double magnitude_db(std::complex<double> x);

// Normalized colormap coordinate, clamped to [0, 1].
double db_to_unit(double db, const DbRange& range);

// ceil = loudest bin, floor = ceil - 80 dB.
DbRange auto_db_range(const StftMatrix& m, double dynamic_range_db = kDefaultDynamicRangeDb);

// Row-major RGB image. Time runs left to right (one column per STFT frame),
// frequency bottom to top (row height-1 is the most negative bin).
struct SpectrogramImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;
  double db_floor = 0.0;
  double db_ceil = 0.0;

  Rgb pixel(std::size_t x, std::size_t y) const {
    const std::size_t i = 3 * (y * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  bool operator==(const SpectrogramImage&) const = default;
};

SpectrogramImage render_spectrogram(const StftMatrix& m, const CmapSpec& cmap,
                                    const DbRange& range);
SpectrogramImage render_spectrogram(const StftMatrix& m, const CmapSpec& cmap);

// A contiguous run of image columns produced by the streaming engine.
struct ImageColumns {
  std::size_t first_column = 0;
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // row-major within this group
};

SpectrogramImage stitch_columns(std::span<const ImageColumns> groups, std::size_t height,
                                const DbRange& range);

// Incremental STFT over arbitrarily sized chunks. Frames that straddle a chunk
// boundary are assembled from the carried tail of earlier chunks plus the head
// of the new one; no sample is ever dropped or reordered.
class StreamingStft {
 public:
  using FrameSink = std::function<void(std::size_t frame_index, std::span<const std::complex<double>>)>;

  StreamingStft(const StftConfig& cfg, double sample_rate_hz);

  void push(std::span<const Sample> chunk, const FrameSink& sink);

  std::size_t frames_emitted() const { return next_frame_; }
  std::uint64_t samples_consumed() const { return total_; }
  // Samples after the last complete frame; dropped when the stream ends.
  std::size_t pending_samples() const { return carry_.size(); }
  const StftConfig& config() const { return cfg_; }
  double sample_rate_hz() const { return fs_; }

 private:
  StftConfig cfg_;
  double fs_;
  FrameTransformer xf_;
  std::vector<std::complex<double>> bins_;
  SampleVector carry_;              // samples [carry_start_, total_)
  std::uint64_t carry_start_ = 0;
  std::uint64_t next_start_ = 0;    // first sample of the next frame
  std::uint64_t total_ = 0;         // samples pushed so far
  std::size_t next_frame_ = 0;
};

// Streaming counterpart of render_spectrogram. The dB range has to be fixed
// up front; given the same range the stitched output equals the batch image.
class StreamingSpectrogram {
 public:
  StreamingSpectrogram(const StftConfig& cfg, double sample_rate_hz, const CmapSpec& cmap,
                       const DbRange& range);

  ImageColumns push(std::span<const Sample> chunk);
  std::size_t columns_emitted() const { return stft_.frames_emitted(); }
  std::size_t height() const { return stft_.config().n_fft; }
  const DbRange& range() const { return range_; }

 private:
  StreamingStft stft_;
  const CmapSpec& cmap_;
  DbRange range_;
};

}  // namespace dronerf
