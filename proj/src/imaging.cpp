#include "triage/imaging.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include <opencv2/core.hpp>
#include <opencv2/imgcodecs.hpp>

#include "triage/error.hpp"

namespace triage::imaging {

namespace {

// Luminance in integer thousandths so that grey inputs map back exactly.
double luminance(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<double>(299 * r + 587 * g + 114 * b) / 1000.0;
}

struct Tap {
  int source;
  double weight;
};

// For each output index, the source samples overlapping its footprint and
// their normalised overlap weights.
std::vector<std::vector<Tap>> area_taps(int in_size, int out_size) {
  std::vector<std::vector<Tap>> taps(out_size);
  const double scale = static_cast<double>(in_size) / out_size;
  for (int o = 0; o < out_size; ++o) {
    const double lo = o * scale;
    const double hi = (o + 1) * scale;
    const int first = static_cast<int>(std::floor(lo));
    const int last = std::min(in_size - 1, static_cast<int>(std::ceil(hi)) - 1);
    double total = 0.0;
    for (int s = first; s <= last; ++s) {
      const double overlap = std::min<double>(hi, s + 1) - std::max<double>(lo, s);
      if (overlap > 0.0) {
        taps[o].push_back({s, overlap});
        total += overlap;
      }
    }
    for (auto& tap : taps[o]) tap.weight /= total;
  }
  return taps;
}

}  // namespace

Raster::Raster(int width, int height, std::vector<double> samples)
    : width_(width), height_(height), samples_(std::move(samples)) {
  if (width < 1 || height < 1) {
    throw InvalidImage("raster dimensions must be at least 1x1, got " + std::to_string(width) +
                       "x" + std::to_string(height));
  }
  if (samples_.size() != static_cast<std::size_t>(width) * static_cast<std::size_t>(height)) {
    throw InvalidImage("raster sample count " + std::to_string(samples_.size()) +
                       " does not match " + std::to_string(width) + "x" + std::to_string(height));
  }
  for (double v : samples_) {
    if (!std::isfinite(v)) throw InvalidImage("raster contains a non-finite sample");
  }
}

Raster Raster::filled(int width, int height, double value) {
  if (width < 1 || height < 1) throw InvalidImage("raster dimensions must be at least 1x1");
  return Raster(width, height,
                std::vector<double>(static_cast<std::size_t>(width) * height, value));
}

GrayImage::GrayImage(int width, int height, std::vector<double> samples)
    : GrayImage(Raster(width, height, std::move(samples))) {}

GrayImage::GrayImage(Raster raster) : raster_(std::move(raster)) {
  for (double v : raster_.samples()) {
    if (v < 0.0 || v > 255.0) throw InvalidImage("grayscale sample outside [0, 255]");
  }
}

GrayImage GrayImage::filled(int width, int height, double value) {
  return GrayImage(Raster::filled(width, height, value));
}

Kernel3x3::Kernel3x3(const std::array<double, 9>& coefficients) : coefficients_(coefficients) {
  for (double c : coefficients_) {
    if (!std::isfinite(c)) throw InvalidImage("kernel coefficient is not finite");
  }
}

Kernel3x3 Kernel3x3::identity() { return Kernel3x3({0, 0, 0, 0, 1, 0, 0, 0, 0}); }

Kernel3x3 Kernel3x3::laplacian() { return Kernel3x3({0, 1, 0, 1, -4, 1, 0, 1, 0}); }

GrayImage to_grayscale(const RgbImage& image) {
  if (image.width < 1 || image.height < 1) {
    throw InvalidImage("cannot convert an empty RGB raster");
  }
  const std::size_t count = static_cast<std::size_t>(image.width) * image.height;
  if (image.pixels.size() != count * 3) {
    throw InvalidImage("RGB buffer size does not match its dimensions");
  }
  std::vector<double> gray(count);
  for (std::size_t i = 0; i < count; ++i) {
    gray[i] = luminance(image.pixels[3 * i], image.pixels[3 * i + 1], image.pixels[3 * i + 2]);
  }
  return GrayImage(image.width, image.height, std::move(gray));
}

Raster convolve3x3(const Raster& image, const Kernel3x3& kernel) {
  if (image.empty()) throw InvalidImage("cannot convolve an empty raster");
  const int w = image.width();
  const int h = image.height();
  std::vector<double> out(image.size());
  for (int y = 0; y < h; ++y) {
    const int rows[3] = {std::max(y - 1, 0), y, std::min(y + 1, h - 1)};
    for (int x = 0; x < w; ++x) {
      const int cols[3] = {std::max(x - 1, 0), x, std::min(x + 1, w - 1)};
      double acc = 0.0;
      for (int r = 0; r < 3; ++r) {
        for (int c = 0; c < 3; ++c) acc += kernel(r, c) * image.at(cols[c], rows[r]);
      }
      out[static_cast<std::size_t>(y) * w + x] = acc;
    }
  }
  return Raster(w, h, std::move(out));
}

Raster convolve3x3(const GrayImage& image, const Kernel3x3& kernel) {
  return convolve3x3(image.raster(), kernel);
}

double variance(std::span<const double> samples) {
  if (samples.empty()) throw InvalidImage("variance of an empty raster is undefined");
  // Shifted, corrected two-pass: a constant input yields exactly zero.
  const double shift = samples.front();
  const double n = static_cast<double>(samples.size());
  double sum = 0.0;
  for (double v : samples) sum += v - shift;
  const double mean = sum / n;
  double squares = 0.0;
  double residual = 0.0;
  for (double v : samples) {
    const double d = (v - shift) - mean;
    squares += d * d;
    residual += d;
  }
  return std::max(0.0, (squares - residual * residual / n) / n);
}

double variance(const Raster& raster) { return variance(raster.samples()); }

double variance_of_laplacian(const GrayImage& image) {
  return variance(convolve3x3(image, Kernel3x3::laplacian()));
}

GrayImage resample_area(const GrayImage& image, int width, int height) {
  if (image.empty()) throw InvalidImage("cannot resample an empty image");
  if (width < 1 || height < 1) throw InvalidImage("resample target must be at least 1x1");
  if (width == image.width() && height == image.height()) return image;

  const auto xtaps = area_taps(image.width(), width);
  const auto ytaps = area_taps(image.height(), height);

  std::vector<double> horizontal(static_cast<std::size_t>(width) * image.height());
  for (int y = 0; y < image.height(); ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& tap : xtaps[x]) acc += tap.weight * image.at(tap.source, y);
      horizontal[static_cast<std::size_t>(y) * width + x] = acc;
    }
  }
  std::vector<double> out(static_cast<std::size_t>(width) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      double acc = 0.0;
      for (const auto& tap : ytaps[y]) {
        acc += tap.weight * horizontal[static_cast<std::size_t>(tap.source) * width + x];
      }
      out[static_cast<std::size_t>(y) * width + x] = std::clamp(acc, 0.0, 255.0);
    }
  }
  return GrayImage(width, height, std::move(out));
}

GrayImage downscale(const GrayImage& image, int factor) {
  if (factor < 1) throw InvalidImage("downscale factor must be >= 1");
  if (factor == 1) return image;
  return resample_area(image, std::max(1, image.width() / factor),
                       std::max(1, image.height() / factor));
}

GrayImage load_grayscale(const std::filesystem::path& path, int downscale_factor) {
  cv::Mat bgr;
  try {
    bgr = cv::imread(path.string(), cv::IMREAD_COLOR);
  } catch (const cv::Exception& e) {
    throw DecodeError(path.string() + ": " + e.what());
  }
  if (bgr.empty() || bgr.type() != CV_8UC3) {
    throw DecodeError(path.string() + ": not a decodable 8-bit PNG/JPEG image");
  }
  std::vector<double> gray(static_cast<std::size_t>(bgr.rows) * bgr.cols);
  for (int y = 0; y < bgr.rows; ++y) {
    const auto* row = bgr.ptr<cv::Vec3b>(y);
    for (int x = 0; x < bgr.cols; ++x) {
      gray[static_cast<std::size_t>(y) * bgr.cols + x] = luminance(row[x][2], row[x][1], row[x][0]);
    }
  }
  GrayImage image(bgr.cols, bgr.rows, std::move(gray));
  return downscale(image, downscale_factor);
}

void save_png(const GrayImage& image, const std::filesystem::path& path) {
  cv::Mat mat(image.height(), image.width(), CV_8UC1);
  for (int y = 0; y < image.height(); ++y) {
    auto* row = mat.ptr<std::uint8_t>(y);
    for (int x = 0; x < image.width(); ++x) {
      row[x] = static_cast<std::uint8_t>(std::lround(image.at(x, y)));
    }
  }
  bool ok = false;
  try {
    ok = cv::imwrite(path.string(), mat);
  } catch (const cv::Exception& e) {
    throw IoError(path.string() + ": " + e.what());
  }
  if (!ok) throw IoError(path.string() + ": failed to write PNG");
}

}  // namespace triage::imaging
