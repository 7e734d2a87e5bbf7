#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "dronerf/spectrogram.hpp"

namespace dronerf {

// 8-bit RGB PNG, no timestamp or text chunks, so identical images encode to
// identical bytes.
std::vector<std::uint8_t> encode_png(const SpectrogramImage& img);
void write_png(const SpectrogramImage& img, const std::filesystem::path& path);

// Binary P6 pixmap, handy for byte-exact comparisons.
std::vector<std::uint8_t> encode_ppm(const SpectrogramImage& img);
void write_ppm(const SpectrogramImage& img, const std::filesystem::path& path);

}  // namespace dronerf
