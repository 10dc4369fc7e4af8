#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace vista {

using Rgb = Eigen::Vector3d;

/// Row-major RGB image with channel values in [0,1].
struct ImageBuffer {
  int width = 0;
  int height = 0;
  std::vector<double> data;  // (y * width + x) * 3 + c

  ImageBuffer() = default;
  ImageBuffer(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h * 3, fill) {}

  static ImageBuffer filled(int w, int h, const Rgb& color);

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }
  bool empty() const { return width == 0 || height == 0; }

  double& at(int x, int y, int c) { return data[(static_cast<std::size_t>(y) * width + x) * 3 + c]; }
  double at(int x, int y, int c) const {
    return data[(static_cast<std::size_t>(y) * width + x) * 3 + c];
  }
  Rgb pixel(int x, int y) const {
    const double* p = &data[(static_cast<std::size_t>(y) * width + x) * 3];
    return {p[0], p[1], p[2]};
  }
  void set_pixel(int x, int y, const Rgb& v) {
    double* p = &data[(static_cast<std::size_t>(y) * width + x) * 3];
    p[0] = v[0];
    p[1] = v[1];
    p[2] = v[2];
  }
};

/// Single-channel float map. Used for masks, weights, uncertainty, depth, and alpha.
struct GrayMap {
  int width = 0;
  int height = 0;
  std::vector<double> data;

  GrayMap() = default;
  GrayMap(int w, int h, double fill = 0.0)
      : width(w), height(h), data(static_cast<std::size_t>(w) * h, fill) {}

  std::size_t pixel_count() const { return static_cast<std::size_t>(width) * height; }

  double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
  double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
};

using MaskMap = GrayMap;
using UncertaintyMap = GrayMap;
using MaskStack = std::vector<MaskMap>;

bool same_size(const ImageBuffer& a, const ImageBuffer& b);
bool same_size(const ImageBuffer& a, const GrayMap& b);
bool same_size(const GrayMap& a, const GrayMap& b);

/// Throws kDimensionMismatch naming `what` when the sizes differ.
void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* what);
void require_same_size(const ImageBuffer& a, const GrayMap& b, const char* what);
void require_same_size(const GrayMap& a, const GrayMap& b, const char* what);

/// Bilinear interpolation with edge clamping; pixel (x, y) is centred at (x, y).
Rgb sample_bilinear(const ImageBuffer& image, double u, double v);
double sample_bilinear(const GrayMap& map, double u, double v);

/// Per-pixel (1 - m) * a + m * b.
ImageBuffer blend(const ImageBuffer& a, const ImageBuffer& b, const GrayMap& m);

ImageBuffer crop(const ImageBuffer& image, int x0, int y0, int w, int h);
GrayMap crop(const GrayMap& map, int x0, int y0, int w, int h);

bool all_finite_in_unit_range(const ImageBuffer& image);

}  // namespace vista
