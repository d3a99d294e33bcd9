#ifndef V2XNOISE_IMAGE_HPP
#define V2XNOISE_IMAGE_HPP

#include <Eigen/Core>
#include <Eigen/LU>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace v2xnoise {

/// 8-bit RGB raster, row-major, no padding.
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> data;  // width * height * 3

  ImageBuffer() = default;
  ImageBuffer(int w, int h) : width(w), height(h) {
    if (w <= 0 || h <= 0) {
      throw std::invalid_argument("ImageBuffer: non-positive dimensions");
    }
    data.assign(static_cast<std::size_t>(w) * h * 3, 0);
  }

  std::uint8_t* pixel(int x, int y) {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }
  const std::uint8_t* pixel(int x, int y) const {
    return data.data() + (static_cast<std::size_t>(y) * width + x) * 3;
  }

  bool same_pixels(const ImageBuffer& o) const {
    return width == o.width && height == o.height && data == o.data;
  }
};

namespace detail {

/// Bilinear sample at continuous (x, y); out-of-bounds contributions are
/// black. Writes three channels into `out`.
inline void bilinear_sample(const ImageBuffer& img, double x, double y,
                            std::uint8_t* out) {
  double fx = std::floor(x);
  double fy = std::floor(y);
  int x0 = static_cast<int>(fx);
  int y0 = static_cast<int>(fy);
  double ax = x - fx;
  double ay = y - fy;

  double acc[3] = {0.0, 0.0, 0.0};
  const int xs[2] = {x0, x0 + 1};
  const int ys[2] = {y0, y0 + 1};
  const double wx[2] = {1.0 - ax, ax};
  const double wy[2] = {1.0 - ay, ay};
  for (int j = 0; j < 2; ++j) {
    if (ys[j] < 0 || ys[j] >= img.height || wy[j] == 0.0) continue;
    for (int i = 0; i < 2; ++i) {
      if (xs[i] < 0 || xs[i] >= img.width || wx[i] == 0.0) continue;
      const std::uint8_t* p = img.pixel(xs[i], ys[j]);
      double w = wx[i] * wy[j];
      acc[0] += w * p[0];
      acc[1] += w * p[1];
      acc[2] += w * p[2];
    }
  }
  for (int c = 0; c < 3; ++c) {
    out[c] = static_cast<std::uint8_t>(
        std::clamp(std::lround(acc[c]), 0L, 255L));
  }
}

}  // namespace detail

/// output(x, y) = input(x - du, y - dv), bilinear, black fill.
inline ImageBuffer shift_image(const ImageBuffer& img, double du, double dv) {
  if (du == 0.0 && dv == 0.0) return img;
  ImageBuffer out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      detail::bilinear_sample(img, x - du, y - dv, out.pixel(x, y));
    }
  }
  return out;
}

/// Inverse warp under a forward homography: output(x, y) samples the input
/// at H^-1 (x, y, 1) after the perspective divide. Black fill.
inline ImageBuffer warp_image(const ImageBuffer& img,
                              const Eigen::Matrix3d& h_mat) {
  if (std::abs(h_mat.determinant()) < 1e-12) {
    throw std::invalid_argument("warp_image: homography is singular");
  }
  if (h_mat.isIdentity(0.0)) return img;
  Eigen::Matrix3d inv = h_mat.inverse();
  ImageBuffer out(img.width, img.height);
  for (int y = 0; y < img.height; ++y) {
    for (int x = 0; x < img.width; ++x) {
      Eigen::Vector3d src = inv * Eigen::Vector3d(x, y, 1.0);
      if (src.z() == 0.0) continue;  // maps to infinity; leave black
      detail::bilinear_sample(img, src.x() / src.z(), src.y() / src.z(),
                              out.pixel(x, y));
    }
  }
  return out;
}

}  // namespace v2xnoise

#endif  // V2XNOISE_IMAGE_HPP
