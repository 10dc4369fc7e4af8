#include "vista/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vista/error.hpp"

namespace vista {

std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::kInvalidArgument: return "invalid-argument";
    case ErrorKind::kMissingCameraEntry: return "missing-camera-entry";
    case ErrorKind::kDimensionMismatch: return "dimension-mismatch";
    case ErrorKind::kUnreadableImage: return "unreadable-image";
    case ErrorKind::kUnsupportedCameraModel: return "unsupported-camera-model";
    case ErrorKind::kParseError: return "parse-error";
    case ErrorKind::kEmptyPointSet: return "empty-point-set";
    case ErrorKind::kVersionMismatch: return "version-mismatch";
    case ErrorKind::kCorruptHeader: return "corrupt-header";
    case ErrorKind::kNonFiniteGradient: return "non-finite-gradient";
    case ErrorKind::kOutOfRange: return "out-of-range";
    case ErrorKind::kEmptyMask: return "empty-mask";
    case ErrorKind::kCountMismatch: return "count-mismatch";
    case ErrorKind::kTooFewViews: return "too-few-views";
    case ErrorKind::kNetworkError: return "network-error";
    case ErrorKind::kProtocolError: return "protocol-error";
    case ErrorKind::kContractViolation: return "contract-violation";
    case ErrorKind::kBackendFailure: return "backend-failure";
    case ErrorKind::kIoError: return "io-error";
  }
  return "unknown";
}

ImageBuffer ImageBuffer::filled(int w, int h, const Rgb& color) {
  ImageBuffer img(w, h);
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    img.data[i * 3 + 0] = color[0];
    img.data[i * 3 + 1] = color[1];
    img.data[i * 3 + 2] = color[2];
  }
  return img;
}

bool same_size(const ImageBuffer& a, const ImageBuffer& b) {
  return a.width == b.width && a.height == b.height;
}
bool same_size(const ImageBuffer& a, const GrayMap& b) {
  return a.width == b.width && a.height == b.height;
}
bool same_size(const GrayMap& a, const GrayMap& b) {
  return a.width == b.width && a.height == b.height;
}

namespace {

template <typename A, typename B>
void require_impl(const A& a, const B& b, const char* what) {
  if (!same_size(a, b)) {
    fail(ErrorKind::kDimensionMismatch, std::string(what) + ": " + std::to_string(a.width) + "x" +
                                            std::to_string(a.height) + " vs " +
                                            std::to_string(b.width) + "x" + std::to_string(b.height));
  }
}

struct BilinearTaps {
  int x0, x1, y0, y1;
  double fx, fy;
};

BilinearTaps taps(int width, int height, double u, double v) {
  u = std::clamp(u, 0.0, static_cast<double>(width - 1));
  v = std::clamp(v, 0.0, static_cast<double>(height - 1));
  BilinearTaps t{};
  t.x0 = static_cast<int>(std::floor(u));
  t.y0 = static_cast<int>(std::floor(v));
  t.x1 = std::min(t.x0 + 1, width - 1);
  t.y1 = std::min(t.y0 + 1, height - 1);
  t.fx = u - t.x0;
  t.fy = v - t.y0;
  return t;
}

}  // namespace

void require_same_size(const ImageBuffer& a, const ImageBuffer& b, const char* what) {
  require_impl(a, b, what);
}
void require_same_size(const ImageBuffer& a, const GrayMap& b, const char* what) {
  require_impl(a, b, what);
}
void require_same_size(const GrayMap& a, const GrayMap& b, const char* what) {
  require_impl(a, b, what);
}

Rgb sample_bilinear(const ImageBuffer& image, double u, double v) {
  const BilinearTaps t = taps(image.width, image.height, u, v);
  const Rgb top = (1.0 - t.fx) * image.pixel(t.x0, t.y0) + t.fx * image.pixel(t.x1, t.y0);
  const Rgb bottom = (1.0 - t.fx) * image.pixel(t.x0, t.y1) + t.fx * image.pixel(t.x1, t.y1);
  return (1.0 - t.fy) * top + t.fy * bottom;
}

double sample_bilinear(const GrayMap& map, double u, double v) {
  const BilinearTaps t = taps(map.width, map.height, u, v);
  const double top = (1.0 - t.fx) * map.at(t.x0, t.y0) + t.fx * map.at(t.x1, t.y0);
  const double bottom = (1.0 - t.fx) * map.at(t.x0, t.y1) + t.fx * map.at(t.x1, t.y1);
  return (1.0 - t.fy) * top + t.fy * bottom;
}

ImageBuffer blend(const ImageBuffer& a, const ImageBuffer& b, const GrayMap& m) {
  require_same_size(a, b, "blend");
  require_same_size(a, m, "blend mask");
  ImageBuffer out(a.width, a.height);
  for (std::size_t i = 0; i < a.pixel_count(); ++i) {
    const double w = m.data[i];
    for (int c = 0; c < 3; ++c) {
      const std::size_t k = i * 3 + c;
      // Exact passthrough where w == 0 so unmasked pixels are bit-identical.
      out.data[k] = w == 0.0 ? a.data[k] : (1.0 - w) * a.data[k] + w * b.data[k];
    }
  }
  return out;
}

ImageBuffer crop(const ImageBuffer& image, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > image.width || y0 + h > image.height) {
    fail(ErrorKind::kOutOfRange, "crop window outside image");
  }
  ImageBuffer out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.set_pixel(x, y, image.pixel(x0 + x, y0 + y));
  }
  return out;
}

GrayMap crop(const GrayMap& map, int x0, int y0, int w, int h) {
  if (x0 < 0 || y0 < 0 || w < 0 || h < 0 || x0 + w > map.width || y0 + h > map.height) {
    fail(ErrorKind::kOutOfRange, "crop window outside map");
  }
  GrayMap out(w, h);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) out.at(x, y) = map.at(x0 + x, y0 + y);
  }
  return out;
}

bool all_finite_in_unit_range(const ImageBuffer& image) {
  return std::all_of(image.data.begin(), image.data.end(),
                     [](double v) { return std::isfinite(v) && v >= 0.0 && v <= 1.0; });
}

}  // namespace vista
