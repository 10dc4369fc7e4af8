#pragma once

#include "vista/image.hpp"

namespace vista {

struct LossWeights {
  double l1 = 0.8;
  double dssim = 0.2;
};

/// Throws kInvalidArgument unless both weights are non-negative and sum to 1.
void validate(const LossWeights& lambda);

/// lambda1 * weighted-L1 + lambda2 * (1 - weighted SSIM) / 2 between target and rendered.
/// The L1 term is sum W|I - R| / (3 sum W). When `grad_rendered` is non-null it receives dL/dR.
double loss_weighted(const ImageBuffer& target, const ImageBuffer& rendered, const GrayMap& weights,
                     const LossWeights& lambda = {}, ImageBuffer* grad_rendered = nullptr);

}  // namespace vista
