#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace triage::imaging {

/// Row-major raster of real samples. Values may be negative (filter output).
class Raster {
 public:
  Raster() = default;
  /// Throws InvalidImage on zero dimensions, size mismatch, or non-finite samples.
  Raster(int width, int height, std::vector<double> samples);

  static Raster filled(int width, int height, double value);

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  std::size_t size() const noexcept { return samples_.size(); }
  bool empty() const noexcept { return samples_.empty(); }

  std::span<const double> samples() const noexcept { return samples_; }
  std::span<double> samples() noexcept { return samples_; }

  double at(int x, int y) const { return samples_[static_cast<std::size_t>(y) * width_ + x]; }
  double& at(int x, int y) { return samples_[static_cast<std::size_t>(y) * width_ + x]; }

  friend bool operator==(const Raster&, const Raster&) = default;

 private:
  int width_ = 0;
  int height_ = 0;
  std::vector<double> samples_;
};

/// Single-channel luminance image, every sample in [0, 255].
class GrayImage {
 public:
  GrayImage() = default;
  GrayImage(int width, int height, std::vector<double> samples);
  explicit GrayImage(Raster raster);

  static GrayImage filled(int width, int height, double value);

  int width() const noexcept { return raster_.width(); }
  int height() const noexcept { return raster_.height(); }
  std::size_t size() const noexcept { return raster_.size(); }
  bool empty() const noexcept { return raster_.empty(); }
  std::span<const double> samples() const noexcept { return raster_.samples(); }
  double at(int x, int y) const { return raster_.at(x, y); }

  const Raster& raster() const noexcept { return raster_; }

  friend bool operator==(const GrayImage&, const GrayImage&) = default;

 private:
  Raster raster_;
};

/// Interleaved 8-bit RGB raster.
struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // size = width * height * 3
};

class Kernel3x3 {
 public:
  /// Row-major coefficients. Throws InvalidImage when any coefficient is non-finite.
  explicit Kernel3x3(const std::array<double, 9>& coefficients);

  static Kernel3x3 identity();
  /// 4-neighbour stencil [[0,1,0],[1,-4,1],[0,1,0]].
  static Kernel3x3 laplacian();

  double operator()(int row, int col) const { return coefficients_[row * 3 + col]; }
  const std::array<double, 9>& coefficients() const noexcept { return coefficients_; }

 private:
  std::array<double, 9> coefficients_;
};

/// BT.601 luminance, 0.299 R + 0.587 G + 0.114 B.
GrayImage to_grayscale(const RgbImage& image);

/// 3x3 correlation with clamp-to-edge borders. Output is signed and unclamped.
Raster convolve3x3(const Raster& image, const Kernel3x3& kernel);
Raster convolve3x3(const GrayImage& image, const Kernel3x3& kernel);

/// Population variance (divides by N). Throws InvalidImage on empty input.
double variance(std::span<const double> samples);
double variance(const Raster& raster);

/// Variance of the 4-neighbour Laplacian response; low values indicate blur.
double variance_of_laplacian(const GrayImage& image);

/// Area-averaging resample to the requested size (down- or up-sampling).
GrayImage resample_area(const GrayImage& image, int width, int height);

/// Integer box downscale; factor 1 returns the image unchanged.
GrayImage downscale(const GrayImage& image, int factor);

/// Decodes a PNG or JPEG file to grayscale. Throws DecodeError on failure.
GrayImage load_grayscale(const std::filesystem::path& path, int downscale_factor = 1);

/// Writes an 8-bit grayscale PNG (samples rounded). Throws IoError.
void save_png(const GrayImage& image, const std::filesystem::path& path);

}  // namespace triage::imaging
