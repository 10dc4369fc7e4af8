#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vista/image.hpp"

namespace vista {

inline constexpr double kPsnrIdentical = 99.0;

/// 10 log10(1 / MSE) over all channels; 99 for identical images.
double psnr(const ImageBuffer& a, const ImageBuffer& b);

/// Mean SSIM, 11x11 Gaussian window (sigma 1.5), border windows renormalised.
double ssim(const ImageBuffer& a, const ImageBuffer& b);

struct PixelBox {
  int x0 = 0, y0 = 0, width = 0, height = 0;
};

/// Bounding box of pixels with mask > 0.5. Throws kEmptyMask when there are none.
PixelBox mask_bbox(const GrayMap& mask);
ImageBuffer masked_bbox_crop(const ImageBuffer& image, const GrayMap& mask);

struct MetricRow {
  std::string name;
  double psnr = 0.0;
  double ssim = 0.0;
};

/// CSV with name,psnr,ssim,lpips,fid; the last two columns are left for external tools.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& rows);

}  // namespace vista
