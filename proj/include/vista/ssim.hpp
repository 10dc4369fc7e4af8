#pragma once

#include "vista/image.hpp"

namespace vista {

inline constexpr int kSsimWindow = 11;
inline constexpr double kSsimSigma = 1.5;
inline constexpr double kSsimC1 = 0.01 * 0.01;
inline constexpr double kSsimC2 = 0.03 * 0.03;

/// Weighted SSIM. Window statistics at p use the weights g(p-q)·W(q) over in-frame q, renormalised
/// by their sum; the per-pixel map is then averaged with weights W(p) over pixels and channels.
/// With W = 1 this is plain SSIM with border-renormalised windows.
/// When `grad_x` is non-null it receives dSSIM/dx. Throws when W sums to zero.
double ssim_weighted(const ImageBuffer& x, const ImageBuffer& y, const GrayMap& weights,
                     ImageBuffer* grad_x = nullptr);

}  // namespace vista
