#include "trajmine/image.hpp"

#include <algorithm>
#include <cmath>

#include "trajmine/errors.hpp"

namespace trajmine {

Image::Image(int w, int h, int c, std::uint8_t fill) : width(w), height(h), channels(c) {
  if (w < 0 || h < 0 || (c != 1 && c != 3)) throw GeometryError("invalid image shape");
  pixels.assign(static_cast<std::size_t>(w) * h * c, fill);
}

double luma(const Image& image, int x, int y) {
  if (image.channels == 1) return image.at(x, y);
  return 0.299 * image.at(x, y, 0) + 0.587 * image.at(x, y, 1) + 0.114 * image.at(x, y, 2);
}

Image to_gray(const Image& image) {
  if (image.channels == 1) return image;
  Image out(image.width, image.height, 1);
  for (int y = 0; y < image.height; ++y) {
    for (int x = 0; x < image.width; ++x) {
      out.at(x, y) = static_cast<std::uint8_t>(std::clamp(std::lround(luma(image, x, y)), 0L, 255L));
    }
  }
  return out;
}

Image warp_image(const Image& image, const AffineParams& params, int out_width, int out_height,
                 std::uint8_t fill) {
  if (image.empty()) throw GeometryError("warp_image: empty source image");
  const AffineMatrix inv = to_matrix(params).inverse();
  Image out(out_width, out_height, image.channels, fill);

  constexpr double kSnap = 1e-9;
  const double max_x = image.width - 1;
  const double max_y = image.height - 1;
  for (int y = 0; y < out_height; ++y) {
    for (int x = 0; x < out_width; ++x) {
      Point2 src = inv.apply({static_cast<double>(x), static_cast<double>(y)});
      // Remove rounding noise so grid-aligned maps sample pixels exactly.
      const double rx = std::round(src.x);
      const double ry = std::round(src.y);
      if (std::abs(src.x - rx) < kSnap) src.x = rx;
      if (std::abs(src.y - ry) < kSnap) src.y = ry;
      if (src.x < 0.0 || src.y < 0.0 || src.x > max_x || src.y > max_y) continue;

      const int x0 = static_cast<int>(std::floor(src.x));
      const int y0 = static_cast<int>(std::floor(src.y));
      const int x1 = std::min(x0 + 1, image.width - 1);
      const int y1 = std::min(y0 + 1, image.height - 1);
      const double fx = src.x - x0;
      const double fy = src.y - y0;
      for (int c = 0; c < image.channels; ++c) {
        const double top = (1.0 - fx) * image.at(x0, y0, c) + fx * image.at(x1, y0, c);
        const double bottom = (1.0 - fx) * image.at(x0, y1, c) + fx * image.at(x1, y1, c);
        const double v = (1.0 - fy) * top + fy * bottom;
        out.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return out;
}

}  // namespace trajmine
