#pragma once

// Shared helpers for the unit tests: scratch directories, seeded random
// signals and a brute-force DFT used as the reference transform.

#include <complex>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "dronerf/sample.hpp"

namespace dronerf::test {

class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("dronerf_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline std::vector<char> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

inline void write_bytes(const std::filesystem::path& p, const std::vector<char>& bytes) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline SampleVector random_signal(std::size_t n, std::uint64_t seed, double sigma = 1.0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<float> g(0.0f, static_cast<float>(sigma));
  SampleVector x(n);
  for (auto& s : x) s = {g(rng), g(rng)};
  return x;
}

inline SampleVector tone(std::size_t n, double freq_hz, double fs, double amplitude = 1.0) {
  SampleVector x(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ph = 2.0 * std::numbers::pi * freq_hz * static_cast<double>(i) / fs;
    x[i] = Sample(static_cast<float>(amplitude * std::cos(ph)),
                  static_cast<float>(amplitude * std::sin(ph)));
  }
  return x;
}

// X[k] = sum_n x[n] e^{-2 pi i k n / N}, evaluated term by term in long double.
inline std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    long double re = 0.0L, im = 0.0L;
    for (std::size_t t = 0; t < n; ++t) {
      const long double ang = -2.0L * std::numbers::pi_v<long double> *
                              static_cast<long double>((k * t) % n) / static_cast<long double>(n);
      re += x[t].real() * std::cos(ang) - x[t].imag() * std::sin(ang);
      im += x[t].real() * std::sin(ang) + x[t].imag() * std::cos(ang);
    }
    out[k] = {static_cast<double>(re), static_cast<double>(im)};
  }
  return out;
}

inline double mean_power(const SampleVector& x, std::size_t lo, std::size_t hi) {
  double e = 0.0;
  for (std::size_t i = lo; i < hi; ++i) e += std::norm(std::complex<double>(x[i]));
  return e / static_cast<double>(hi - lo);
}

}  // namespace dronerf::test
