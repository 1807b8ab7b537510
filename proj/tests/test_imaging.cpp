#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "synthetic.hpp"
#include "triage/error.hpp"
#include "triage/imaging.hpp"

namespace triage::imaging {
namespace {

using testing::TempDir;

RgbImage solid_rgb(int w, int h, std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  RgbImage image{w, h, {}};
  for (int i = 0; i < w * h; ++i) image.pixels.insert(image.pixels.end(), {r, g, b});
  return image;
}

TEST(ToGrayscale, WhiteStaysWhite) {
  const auto gray = to_grayscale(solid_rgb(2, 2, 255, 255, 255));
  ASSERT_EQ(gray.width(), 2);
  ASSERT_EQ(gray.height(), 2);
  for (double v : gray.samples()) EXPECT_EQ(v, 255.0);
}

TEST(ToGrayscale, PureRedUsesBt601Weight) {
  const auto gray = to_grayscale(solid_rgb(1, 1, 255, 0, 0));
  EXPECT_NEAR(gray.at(0, 0), 76.245, 1e-12);
}

TEST(ToGrayscale, EmptyRasterIsInvalid) {
  EXPECT_THROW(to_grayscale(RgbImage{0, 0, {}}), InvalidImage);
  EXPECT_THROW(to_grayscale(RgbImage{2, 1, {1, 2, 3}}), InvalidImage);
}

TEST(GrayImage, RejectsOutOfRangeSamples) {
  EXPECT_THROW(GrayImage(1, 1, {256.0}), InvalidImage);
  EXPECT_THROW(GrayImage(1, 1, {-0.5}), InvalidImage);
  EXPECT_THROW(GrayImage(2, 2, {1.0, 2.0, 3.0}), InvalidImage);
  EXPECT_THROW(Raster(1, 1, {std::nan("")}), InvalidImage);
}

TEST(Kernel, RejectsNonFiniteCoefficients) {
  EXPECT_THROW(Kernel3x3({0, 0, 0, 0, INFINITY, 0, 0, 0, 0}), InvalidImage);
}

TEST(Convolve, IdentityKernelLeavesImageUnchanged) {
  const auto image = testing::textured_image(17, 9, 3);
  EXPECT_EQ(convolve3x3(image, Kernel3x3::identity()), image.raster());
}

TEST(Convolve, LaplacianOfConstantIsZero) {
  const auto out = convolve3x3(GrayImage::filled(6, 4, 93.0), Kernel3x3::laplacian());
  for (double v : out.samples()) EXPECT_EQ(v, 0.0);
}

TEST(Convolve, LaplacianOfImpulseByHand) {
  std::vector<double> samples(25, 0.0);
  samples[12] = 255.0;
  const auto out = convolve3x3(GrayImage(5, 5, samples), Kernel3x3::laplacian());
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) {
      double expected = 0.0;
      if (x == 2 && y == 2) expected = -1020.0;
      if (std::abs(x - 2) + std::abs(y - 2) == 1) expected = 255.0;
      EXPECT_EQ(out.at(x, y), expected) << "at " << x << "," << y;
    }
  }
}

TEST(Convolve, ClampToEdgeBorders) {
  // A horizontal ramp has zero second derivative in the interior; with
  // replicated borders the edge columns see a one-sided step.
  std::vector<double> samples;
  for (int y = 0; y < 3; ++y) {
    for (int x = 0; x < 4; ++x) samples.push_back(10.0 * x);
  }
  const auto out = convolve3x3(GrayImage(4, 3, samples), Kernel3x3::laplacian());
  for (int y = 0; y < 3; ++y) {
    EXPECT_EQ(out.at(0, y), 10.0);
    EXPECT_EQ(out.at(1, y), 0.0);
    EXPECT_EQ(out.at(2, y), 0.0);
    EXPECT_EQ(out.at(3, y), -10.0);
  }
}

TEST(Convolve, SinglePixelImage) {
  const auto out = convolve3x3(GrayImage(1, 1, {42.0}), Kernel3x3::laplacian());
  EXPECT_EQ(out.at(0, 0), 0.0);
}

TEST(Convolve, IsLinear) {
  std::mt19937 rng(11);
  std::uniform_real_distribution<double> coeff(-3.0, 3.0);
  const auto kernel = Kernel3x3({coeff(rng), coeff(rng), coeff(rng), coeff(rng), coeff(rng),
                                 coeff(rng), coeff(rng), coeff(rng), coeff(rng)});
  for (unsigned trial = 0; trial < 20; ++trial) {
    const auto x = testing::textured_image(13, 7, trial);
    const auto y = testing::textured_image(13, 7, trial + 100);
    const double a = coeff(rng);
    const double b = coeff(rng);
    std::vector<double> mixed(x.size());
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      mixed[i] = a * x.samples()[i] + b * y.samples()[i];
    }
    const auto lhs = convolve3x3(Raster(13, 7, mixed), kernel);
    const auto cx = convolve3x3(x, kernel);
    const auto cy = convolve3x3(y, kernel);
    for (std::size_t i = 0; i < mixed.size(); ++i) {
      EXPECT_NEAR(lhs.samples()[i], a * cx.samples()[i] + b * cy.samples()[i], 1e-6);
    }
  }
}

TEST(Variance, HandComputedValues) {
  const std::vector<double> a{0, 0, 0, 4};
  const std::vector<double> b{-2, 2};
  EXPECT_DOUBLE_EQ(variance(a), 3.0);
  EXPECT_DOUBLE_EQ(variance(b), 4.0);
}

TEST(Variance, ConstantIsExactlyZero) {
  const std::vector<double> c(1001, 0.1);
  EXPECT_EQ(variance(c), 0.0);
  EXPECT_EQ(variance_of_laplacian(GrayImage::filled(64, 32, 200.0)), 0.0);
}

TEST(Variance, EmptyIsInvalid) {
  EXPECT_THROW(variance(std::span<const double>{}), InvalidImage);
}

TEST(Variance, TranslationInvariant) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> sample(-500.0, 500.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(200);
    for (double& v : x) v = sample(rng);
    const double c = sample(rng) * 1000.0;
    std::vector<double> shifted(x);
    for (double& v : shifted) v += c;
    const double base = variance(x);
    EXPECT_NEAR(variance(shifted), base, 1e-6 * base);
  }
}

TEST(Variance, StableForLargeOffset) {
  // Naive E[x^2] - E[x]^2 loses everything here.
  const std::vector<double> x{1e9 + 4, 1e9 + 7, 1e9 + 13, 1e9 + 16};
  EXPECT_NEAR(variance(x), 22.5, 1e-6);
}

TEST(VarianceOfLaplacian, DecreasesWithBlur) {
  const auto image = testing::textured_image(96, 48, 1);
  double previous = INFINITY;
  for (double sigma : {0.0, 1.0, 2.0, 4.0}) {
    const double v = variance_of_laplacian(testing::gaussian_blur(image, sigma));
    EXPECT_LT(v, previous) << "sigma " << sigma;
    previous = v;
  }
}

TEST(Resample, AreaAverageOfBlocks) {
  // 4x2 -> 2x1 averages each 2x2 block.
  const GrayImage image(4, 2, {0, 10, 100, 110, 20, 30, 120, 130});
  const auto small = resample_area(image, 2, 1);
  EXPECT_DOUBLE_EQ(small.at(0, 0), 15.0);
  EXPECT_DOUBLE_EQ(small.at(1, 0), 115.0);
}

TEST(Resample, PreservesMeanForFractionalScale) {
  const auto image = testing::textured_image(101, 37, 9);
  const auto small = resample_area(image, 64, 32);
  double a = 0, b = 0;
  for (double v : image.samples()) a += v;
  for (double v : small.samples()) b += v;
  EXPECT_NEAR(a / image.size(), b / small.size(), 1e-9);
}

TEST(Downscale, FactorOneIsIdentityAndOthersShrink) {
  const auto image = testing::textured_image(40, 20, 2);
  EXPECT_EQ(downscale(image, 1), image);
  const auto half = downscale(image, 2);
  EXPECT_EQ(half.width(), 20);
  EXPECT_EQ(half.height(), 10);
  EXPECT_THROW(downscale(image, 0), InvalidImage);
}

TEST(Codec, PngRoundTripAndDecodeFailure) {
  TempDir dir;
  const auto image = testing::textured_image(32, 16, 4);
  save_png(image, dir / "frame.png");
  const auto loaded = load_grayscale(dir / "frame.png");
  ASSERT_EQ(loaded.width(), 32);
  ASSERT_EQ(loaded.height(), 16);
  for (std::size_t i = 0; i < image.size(); ++i) {
    EXPECT_EQ(loaded.samples()[i], std::round(image.samples()[i]));
  }
  testing::write_text(dir / "broken.png", "not an image");
  EXPECT_THROW(load_grayscale(dir / "broken.png"), DecodeError);
  EXPECT_THROW(load_grayscale(dir / "absent.png"), DecodeError);
}

}  // namespace
}  // namespace triage::imaging
