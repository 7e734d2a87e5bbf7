#include "dronerf/burst.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "dronerf/dsp.hpp"
#include "dronerf/error.hpp"

namespace dronerf {

std::string_view to_string(BurstClass c) {
  switch (c) {
    case BurstClass::Fhss: return "fhss";
    case BurstClass::Video: return "video";
    case BurstClass::DroneId: return "drone_id";
    case BurstClass::Unknown: return "unknown";
  }
  return "unknown";
}

std::optional<BurstClass> parse_burst_class(std::string_view text) {
  if (text == "fhss") return BurstClass::Fhss;
  if (text == "video") return BurstClass::Video;
  if (text == "drone_id") return BurstClass::DroneId;
  if (text == "unknown") return BurstClass::Unknown;
  return std::nullopt;
}

BurstSegment BurstSegment::from_indices(std::uint64_t start, std::uint64_t end,
                                        double sample_rate_hz, BurstClass label) {
  require(start < end, ErrorCode::InvalidArgument, "burst segment must have start < end");
  require(sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  return {start, end, static_cast<double>(end - start) / sample_rate_hz, label};
}

void DetectorConfig::validate() const {
  require(short_win >= 1, ErrorCode::InvalidArgument, "short_win must be >= 1");
  require(short_win < long_win, ErrorCode::InvalidArgument, "short_win must be < long_win");
  require(threshold_ratio > 1.0, ErrorCode::InvalidArgument, "threshold_ratio must be > 1");
}

namespace {

double seed_reference(std::span<const Sample> x, std::size_t block) {
  std::vector<double> means;
  means.reserve(x.size() / block);
  for (std::size_t off = 0; off + block <= x.size(); off += block) {
    double acc = 0.0;
    for (std::size_t i = off; i < off + block; ++i) acc += std::norm(std::complex<double>(x[i]));
    means.push_back(acc / static_cast<double>(block));
  }
  if (means.empty()) return 0.0;
  auto nth = means.begin() + static_cast<std::ptrdiff_t>(means.size() / 10);
  std::nth_element(means.begin(), nth, means.end());
  return *nth;
}

// Fixed-capacity FIFO of idle-sample powers with a running sum.
class IdleWindow {
 public:
  explicit IdleWindow(std::size_t cap) : buf_(cap, 0.0) {}
  void push(double p) {
    if (count_ == buf_.size()) {
      sum_ -= buf_[head_];
    } else {
      ++count_;
    }
    buf_[head_] = p;
    sum_ += p;
    head_ = (head_ + 1) % buf_.size();
    if (++since_resum_ == buf_.size()) resum();
  }
  bool full() const { return count_ == buf_.size(); }
  double mean() const { return sum_ / static_cast<double>(count_); }

 private:
  void resum() {
    sum_ = std::accumulate(buf_.begin(), buf_.end(), 0.0);
    since_resum_ = 0;
  }
  std::vector<double> buf_;
  std::size_t head_ = 0, count_ = 0, since_resum_ = 0;
  double sum_ = 0.0;
};

}  // namespace

std::vector<BurstSegment> detect_bursts(std::span<const Sample> signal, double sample_rate_hz,
                                        const DetectorConfig& cfg) {
  cfg.validate();
  require(sample_rate_hz > 0.0, ErrorCode::InvalidArgument, "sample rate must be positive");
  if (signal.size() <= cfg.long_win) {
    fail(ErrorCode::InsufficientData, "signal of " + std::to_string(signal.size()) +
                                          " samples is not longer than long_win " +
                                          std::to_string(cfg.long_win));
  }
  require_finite(signal);

  const std::size_t len = signal.size();
  const std::size_t sw = cfg.short_win;
  const std::size_t half = sw / 2;
  auto power = [&](std::size_t i) { return std::norm(std::complex<double>(signal[i])); };

  double global = 0.0;
  for (std::size_t i = 0; i < len; ++i) global += power(i);
  global /= static_cast<double>(len);
  // Guards against running-sum residue being read as energy in silent input.
  const double ref_floor = 1e-12 * global;
  const double seed = seed_reference(signal, sw);

  IdleWindow idle(cfg.long_win);
  std::vector<std::pair<std::uint64_t, std::uint64_t>> raw;
  bool open = false;
  std::size_t start = 0;
  std::size_t resume = 0;
  double frozen = 0.0;

  double wsum = 0.0;
  for (std::size_t i = 0; i < sw; ++i) wsum += power(i);
  // Window for centre n covers [n - half, n - half + sw).
  for (std::size_t n = half; n + sw - half <= len; ++n) {
    if (n > half) {
      wsum += power(n - half + sw - 1) - power(n - half - 1);
      if ((n & 0xffff) == 0) {
        wsum = 0.0;
        for (std::size_t i = n - half; i < n - half + sw; ++i) wsum += power(i);
      }
    }
    const double level = wsum / static_cast<double>(sw);
    if (!open) {
      const double ref = std::max(idle.full() ? idle.mean() : seed, ref_floor);
      if (level > cfg.threshold_ratio * ref) {
        open = true;
        start = n;
        frozen = ref;
      } else if (n > half && n - half - 1 >= resume) {
        idle.push(power(n - half - 1));
      }
    } else if (level < cfg.threshold_ratio * frozen) {
      raw.emplace_back(start, n);
      open = false;
      resume = n - half + sw;
    }
  }
  if (open) raw.emplace_back(start, len);

  std::vector<std::pair<std::uint64_t, std::uint64_t>> merged;
  for (const auto& r : raw) {
    if (!merged.empty() && r.first - merged.back().second < cfg.min_gap) {
      merged.back().second = r.second;
    } else {
      merged.push_back(r);
    }
  }

  std::vector<BurstSegment> out;
  for (const auto& [s, e] : merged) {
    if (e - s < cfg.min_duration) continue;
    out.push_back(BurstSegment::from_indices(s, e, sample_rate_hz));
  }
  return out;
}

ClassRules ClassRules::defaults() {
  return {{{BurstClass::Fhss, 0.0, 1.5e-3}, {BurstClass::Video, 1.5e-3, 12e-3}}};
}

std::vector<BurstSegment> classify_bursts(std::span<const BurstSegment> segments,
                                          const ClassRules& rules) {
  auto on_edge = [](double d, double edge) {
    return std::abs(d - edge) <= 1e-9 * std::max(std::abs(edge), 1e-300);
  };
  std::vector<BurstSegment> out(segments.begin(), segments.end());
  for (auto& seg : out) {
    seg.label = BurstClass::Unknown;
    const double d = seg.duration_s;
    bool edge = false;
    for (const auto& band : rules.bands) edge = edge || on_edge(d, band.min_s) || on_edge(d, band.max_s);
    if (edge) continue;
    for (const auto& band : rules.bands) {
      if (d > band.min_s && d < band.max_s) {
        seg.label = band.label;
        break;
      }
    }
  }
  return out;
}

std::vector<BurstSegment> refine_fhss_by_duration(std::span<const BurstSegment> segments,
                                                  double tightness, std::size_t min_count) {
  std::vector<BurstSegment> out(segments.begin(), segments.end());
  const auto fhss = std::count_if(out.begin(), out.end(),
                                  [](const auto& s) { return s.label == BurstClass::Fhss; });
  if (static_cast<std::size_t>(fhss) >= min_count || out.size() < min_count) return out;

  std::vector<std::size_t> order(out.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](std::size_t a, std::size_t b) { return out[a].duration_s < out[b].duration_s; });

  // Shortest tight cluster: hops are the short, fixed-length frames, video
  // frames run longer.
  std::size_t best_lo = 0, best_hi = 0;
  bool found = false;
  for (std::size_t lo = 0, hi = 0; lo < order.size() && !found; ++lo) {
    hi = std::max(hi, lo);
    while (hi + 1 < order.size() &&
           out[order[hi + 1]].duration_s <= out[order[lo]].duration_s * (1.0 + tightness)) {
      ++hi;
    }
    if (hi - lo + 1 >= min_count) {
      best_lo = lo;
      best_hi = hi;
      found = true;
    }
  }
  if (!found) return out;
  for (std::size_t i = best_lo; i <= best_hi; ++i) out[order[i]].label = BurstClass::Fhss;
  return out;
}

std::vector<BurstSegment> select_class(std::span<const BurstSegment> segments, BurstClass label) {
  std::vector<BurstSegment> out;
  for (const auto& s : segments) {
    if (s.label == label) out.push_back(s);
  }
  return out;
}

}  // namespace dronerf
