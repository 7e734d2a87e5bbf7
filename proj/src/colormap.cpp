#include "dronerf/colormap.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>

#include "dronerf/error.hpp"

namespace dronerf {

namespace {

CmapSpec make_parula() {
  // Ten samples of the conventional map; the final anchor is pinned to pure yellow.
  static constexpr std::array<std::array<double, 3>, 10> kSamples{{
      {0.2422, 0.1504, 0.6603},
      {0.2803, 0.2782, 0.9221},
      {0.2440, 0.4358, 0.9988},
      {0.1540, 0.5902, 0.9218},
      {0.0297, 0.7082, 0.8163},
      {0.1938, 0.7758, 0.6251},
      {0.5044, 0.7993, 0.3480},
      {0.8634, 0.7406, 0.1596},
      {0.9892, 0.8136, 0.1885},
      {1.0, 1.0, 0.0},
  }};
  CmapSpec spec{CmapName::Parula, {}};
  for (std::size_t i = 0; i < kSamples.size(); ++i) {
    auto level = [](double v) { return static_cast<std::uint8_t>(std::lround(v * 255.0)); };
    spec.stops.push_back({static_cast<double>(i) / static_cast<double>(kSamples.size() - 1),
                          {level(kSamples[i][0]), level(kSamples[i][1]), level(kSamples[i][2])}});
  }
  return spec;
}

CmapSpec make_hot() {
  return {CmapName::Hot,
          {{0.0, {0, 0, 0}}, {0.375, {255, 0, 0}}, {0.75, {255, 255, 0}}, {1.0, {255, 255, 255}}}};
}

CmapSpec make_hsv() {
  // Hue sweep 0..300 degrees at full saturation and value.
  return {CmapName::Hsv,
          {{0.0, {255, 0, 0}},
           {0.2, {255, 255, 0}},
           {0.4, {0, 255, 0}},
           {0.6, {0, 255, 255}},
           {0.8, {0, 0, 255}},
           {1.0, {255, 0, 255}}}};
}

CmapSpec make_autumn() { return {CmapName::Autumn, {{0.0, {255, 0, 0}}, {1.0, {255, 255, 0}}}}; }

}  // namespace

void CmapSpec::validate() const {
  require(stops.size() >= 2, ErrorCode::InvalidArgument, "colormap needs at least two stops");
  require(stops.front().position == 0.0 && stops.back().position == 1.0,
          ErrorCode::InvalidArgument, "colormap stops must start at 0 and end at 1");
  for (std::size_t i = 1; i < stops.size(); ++i) {
    require(stops[i].position > stops[i - 1].position, ErrorCode::InvalidArgument,
            "colormap stop positions must be strictly increasing");
  }
}

const CmapSpec& colormap(CmapName name) {
  static const CmapSpec parula = make_parula();
  static const CmapSpec hot = make_hot();
  static const CmapSpec hsv = make_hsv();
  static const CmapSpec autumn = make_autumn();
  switch (name) {
    case CmapName::Parula: return parula;
    case CmapName::Hot: return hot;
    case CmapName::Hsv: return hsv;
    case CmapName::Autumn: return autumn;
  }
  fail(ErrorCode::InvalidArgument, "unknown colormap");
}

std::optional<CmapName> parse_cmap_name(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "parula") return CmapName::Parula;
  if (lower == "hot") return CmapName::Hot;
  if (lower == "hsv") return CmapName::Hsv;
  if (lower == "autumn") return CmapName::Autumn;
  return std::nullopt;
}

std::string_view cmap_display_name(CmapName name) {
  switch (name) {
    case CmapName::Parula: return "Parula";
    case CmapName::Hot: return "Hot";
    case CmapName::Hsv: return "HSV";
    case CmapName::Autumn: return "Autumn";
  }
  return "?";
}

Rgb cmap_lookup(const CmapSpec& cmap, double t) {
  if (!(t > 0.0)) return cmap.stops.front().color;  // also catches NaN
  if (t >= 1.0) return cmap.stops.back().color;
  auto hi = std::upper_bound(cmap.stops.begin(), cmap.stops.end(), t,
                             [](double v, const ColorStop& s) { return v < s.position; });
  auto lo = hi - 1;
  const double u = (t - lo->position) / (hi->position - lo->position);
  auto mix = [u](std::uint8_t a, std::uint8_t b) {
    return static_cast<std::uint8_t>(std::lround(a + (static_cast<double>(b) - a) * u));
  };
  return {mix(lo->color.r, hi->color.r), mix(lo->color.g, hi->color.g),
          mix(lo->color.b, hi->color.b)};
}

}  // namespace dronerf
