#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "trajmine/geometry.hpp"

namespace trajmine {

/// 8-bit interleaved raster with 1 (gray) or 3 (RGB) channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> pixels;

  Image() = default;
  Image(int width, int height, int channels, std::uint8_t fill = 0);

  bool empty() const noexcept { return width <= 0 || height <= 0; }
  bool contains(int x, int y) const noexcept { return x >= 0 && y >= 0 && x < width && y < height; }

  std::uint8_t& at(int x, int y, int c = 0) {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }
  std::uint8_t at(int x, int y, int c = 0) const {
    return pixels[(static_cast<std::size_t>(y) * width + x) * channels + c];
  }

  friend bool operator==(const Image&, const Image&) = default;
};

/// ITU-R BT.601 luma. Gray images return the stored value.
double luma(const Image& image, int x, int y);

Image to_gray(const Image& image);

inline constexpr std::uint8_t kDefaultWarpFill = 128;

/// Inverse-mapped bilinear warp; pixel centres sit on integer coordinates.
/// Output pixels whose source falls outside the image take `fill`.
Image warp_image(const Image& image, const AffineParams& params, int out_width, int out_height,
                 std::uint8_t fill = kDefaultWarpFill);

Image read_png(const std::filesystem::path& path);
/// Writes straight to `path`; callers wanting atomicity write to a sibling
/// temporary and rename.
void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace trajmine
