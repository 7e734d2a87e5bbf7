#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace dronerf {

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  bool operator==(const Rgb&) const = default;
};

enum class CmapName { Parula, Hot, Hsv, Autumn };

struct ColorStop {
  double position;  // in [0, 1]
  Rgb color;
};

struct CmapSpec {
  CmapName name;
  std::vector<ColorStop> stops;  // first at 0, last at 1, strictly increasing

  void validate() const;
};

// Version of the interior stop tables below. Endpoints are fixed; interior
// stops approximate the conventional maps and may be revised.
inline constexpr int kColormapTableVersion = 1;

const CmapSpec& colormap(CmapName name);
std::optional<CmapName> parse_cmap_name(std::string_view text);  // case-insensitive
std::string_view cmap_display_name(CmapName name);

// Piecewise-linear interpolation between adjacent stops, rounded to the
// nearest integer level. t outside [0, 1] is clamped; NaN maps to 0.
Rgb cmap_lookup(const CmapSpec& cmap, double t);

}  // namespace dronerf
