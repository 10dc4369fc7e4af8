#include "vista/metrics.hpp"

#include <cmath>
#include <fstream>

#include "vista/error.hpp"
#include "vista/ssim.hpp"

namespace vista {

double psnr(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "psnr");
  double se = 0.0;
  for (std::size_t k = 0; k < a.data.size(); ++k) {
    const double d = a.data[k] - b.data[k];
    se += d * d;
  }
  if (se == 0.0 || a.data.empty()) return kPsnrIdentical;
  return 10.0 * std::log10(static_cast<double>(a.data.size()) / se);
}

double ssim(const ImageBuffer& a, const ImageBuffer& b) {
  require_same_size(a, b, "ssim");
  return ssim_weighted(a, b, GrayMap(a.width, a.height, 1.0));
}

PixelBox mask_bbox(const GrayMap& mask) {
  int x0 = mask.width, y0 = mask.height, x1 = -1, y1 = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (mask.at(x, y) > 0.5) {
        x0 = std::min(x0, x);
        y0 = std::min(y0, y);
        x1 = std::max(x1, x);
        y1 = std::max(y1, y);
      }
    }
  }
  if (x1 < 0) fail(ErrorKind::kEmptyMask, "mask has no positive pixel");
  return {x0, y0, x1 - x0 + 1, y1 - y0 + 1};
}

ImageBuffer masked_bbox_crop(const ImageBuffer& image, const GrayMap& mask) {
  require_same_size(image, mask, "bbox crop");
  const PixelBox b = mask_bbox(mask);
  return crop(image, b.x0, b.y0, b.width, b.height);
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::kIoError, "cannot write " + path.string());
  out.precision(8);
  out << "name,psnr,ssim,lpips,fid\n";
  for (const auto& r : rows) out << r.name << "," << r.psnr << "," << r.ssim << ",,\n";
}

}  // namespace vista
