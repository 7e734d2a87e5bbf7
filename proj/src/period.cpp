#include <algorithm>
#include <cmath>
#include <optional>
#include <vector>

#include "dronerf/error.hpp"
#include "dronerf/fingerprint.hpp"

namespace dronerf {
namespace {

struct LagScore {
  double lag = 0.0;
  std::size_t eligible = 0;
  std::size_t timing = 0;    // partners found one lag later
  std::size_t labelled = 0;  // partners that also share the label
  double sum_diff = 0.0;     // sum of matched differences, refines the lag
};

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// Integer channel id per label; labels within tol of their sorted neighbour
// fall in the same channel.
std::vector<int> channel_ids(std::span<const double> labels, double tol) {
  std::vector<std::size_t> order(labels.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return labels[a] < labels[b]; });
  std::vector<int> id(labels.size(), 0);
  int current = 0;
  for (std::size_t r = 0; r < order.size(); ++r) {
    if (r > 0 && labels[order[r]] - labels[order[r - 1]] > tol) ++current;
    id[order[r]] = current;
  }
  return id;
}

std::vector<double> candidate_lags(std::span<const double> t, double max_lag, double tol) {
  std::vector<double> diffs;
  for (std::size_t i = 0; i < t.size(); ++i) {
    for (std::size_t j = i + 1; j < t.size(); ++j) {
      const double d = t[j] - t[i];
      if (d > max_lag) break;
      diffs.push_back(d);
    }
  }
  std::sort(diffs.begin(), diffs.end());
  std::vector<double> lags;
  std::size_t a = 0;
  while (a < diffs.size()) {
    std::size_t b = a + 1;
    while (b < diffs.size() && diffs[b] - diffs[b - 1] <= tol) ++b;
    double s = 0.0;
    for (std::size_t k = a; k < b; ++k) s += diffs[k];
    lags.push_back(s / static_cast<double>(b - a));
    a = b;
  }
  return lags;
}

LagScore score_lag(std::span<const double> t, const std::vector<int>* ids, double lag, double tol) {
  LagScore s;
  s.lag = lag;
  const double last = t.back();
  for (std::size_t i = 0; i < t.size(); ++i) {
    const double want = t[i] + lag;
    if (want > last + tol) break;
    ++s.eligible;
    auto lo = std::lower_bound(t.begin() + static_cast<std::ptrdiff_t>(i) + 1, t.end(), want - tol);
    bool timed = false;
    bool same = false;
    double best = 0.0;
    for (auto it = lo; it != t.end() && *it <= want + tol; ++it) {
      const auto j = static_cast<std::size_t>(it - t.begin());
      if (!timed) best = *it - t[i];
      timed = true;
      if (ids && (*ids)[j] == (*ids)[i]) {
        same = true;
        best = *it - t[i];
        break;
      }
    }
    if (timed) {
      ++s.timing;
      s.sum_diff += best;
    }
    if (same) ++s.labelled;
  }
  return s;
}

std::optional<double> estimate_impl(std::span<const double> t, std::span<const double> labels,
                                    bool use_labels, const PeriodConfig& cfg) {
  require(cfg.time_tolerance > 0.0 && cfg.time_tolerance < 0.5, ErrorCode::InvalidArgument,
          "time_tolerance must be in (0, 0.5)");
  require(cfg.peak_fraction > 0.0 && cfg.peak_fraction <= 1.0, ErrorCode::InvalidArgument,
          "peak_fraction must be in (0, 1]");
  require(t.size() >= 4, ErrorCode::InsufficientEvents, "period estimation needs >= 4 events");
  for (std::size_t i = 0; i < t.size(); ++i) {
    require(std::isfinite(t[i]), ErrorCode::InvalidArgument, "non-finite start time");
    if (i > 0) {
      require(t[i] > t[i - 1], ErrorCode::InvalidArgument, "start times must be strictly increasing");
    }
  }

  std::vector<double> spacing;
  for (std::size_t i = 1; i < t.size(); ++i) spacing.push_back(t[i] - t[i - 1]);
  const double tol = cfg.time_tolerance * median_of(spacing);
  const double span = t.back() - t.front();
  const double rate = static_cast<double>(t.size() - 1) / span;

  std::vector<int> ids;
  double concentration = 1.0;
  if (use_labels) {
    require(labels.size() == t.size(), ErrorCode::InvalidArgument,
            "one label per start time required");
    ids = channel_ids(labels, cfg.label_tolerance);
    const int n_ids = *std::max_element(ids.begin(), ids.end()) + 1;
    std::vector<double> count(static_cast<std::size_t>(n_ids), 0.0);
    for (int id : ids) count[static_cast<std::size_t>(id)] += 1.0;
    concentration = 0.0;
    for (double c : count) {
      const double p = c / static_cast<double>(t.size());
      concentration += p * p;
    }
  }
  const bool labelled = use_labels && concentration < cfg.max_label_concentration;

  std::vector<LagScore> scores;
  for (double lag : candidate_lags(t, 0.5 * span + tol, tol)) {
    LagScore s = score_lag(t, labelled ? &ids : nullptr, lag, tol);
    if (s.eligible < 2) continue;
    const double support = static_cast<double>(s.timing) / static_cast<double>(s.eligible);
    if (support < cfg.min_support) continue;
    scores.push_back(s);
  }
  if (scores.empty()) return std::nullopt;

  auto value = [&](const LagScore& s) {
    const double hits = static_cast<double>(labelled ? s.labelled : s.timing);
    return hits / static_cast<double>(s.eligible);
  };
  const LagScore* peak = &scores.front();
  for (const auto& s : scores) {
    if (value(s) > value(*peak)) peak = &s;
  }
  const double peak_value = value(*peak);
  if (peak_value < cfg.min_support) return std::nullopt;

  double prominence_db;
  if (labelled) {
    // Repeats of a timing match that disagree on the label, against the rate
    // two unrelated events would share a channel.
    const double mismatch = 1.0 - static_cast<double>(peak->labelled) /
                                      static_cast<double>(peak->timing);
    const double floor = 1.0 / static_cast<double>(peak->eligible + 1);
    prominence_db = 10.0 * std::log10((1.0 - concentration) / std::max(mismatch, floor));
  } else {
    const double chance = std::min(1.0, 2.0 * tol * rate);
    prominence_db = 10.0 * std::log10(peak_value / chance);
  }
  if (prominence_db < cfg.prominence_db) return std::nullopt;

  const LagScore* chosen = peak;
  for (const auto& s : scores) {
    if (value(s) >= cfg.peak_fraction * peak_value && s.lag < chosen->lag) chosen = &s;
  }
  const std::size_t matched = labelled ? chosen->labelled : chosen->timing;
  if (matched == 0) return chosen->lag;
  if (labelled) {
    // sum_diff mixes timing-only partners in; recompute over labelled ones.
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t i = 0; i < t.size(); ++i) {
      for (std::size_t j = i + 1; j < t.size(); ++j) {
        const double d = t[j] - t[i];
        if (d > chosen->lag + tol) break;
        if (d >= chosen->lag - tol && ids[i] == ids[j]) {
          sum += d;
          ++n;
          break;
        }
      }
    }
    return n ? sum / static_cast<double>(n) : chosen->lag;
  }
  return chosen->sum_diff / static_cast<double>(chosen->timing);
}

}  // namespace

std::optional<double> estimate_period(std::span<const double> start_times_s, const PeriodConfig& cfg) {
  return estimate_impl(start_times_s, {}, false, cfg);
}

std::optional<double> estimate_period(std::span<const double> start_times_s,
                                      std::span<const double> labels, const PeriodConfig& cfg) {
  return estimate_impl(start_times_s, labels, true, cfg);
}

}  // namespace dronerf
