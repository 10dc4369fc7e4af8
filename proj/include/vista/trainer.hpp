#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "vista/camera.hpp"
#include "vista/gaussian_cloud.hpp"
#include "vista/image.hpp"
#include "vista/loss.hpp"
#include "vista/optimizer.hpp"

namespace vista {

struct TrainConfig {
  int iterations = 4000;
  LossWeights lambda;
  LearningRates lr;
  /// Means learning rate decays exponentially from lr.means to this value (both scaled by extent).
  double means_lr_final = 1.6e-6;
  int densify_from = 500;
  int densify_until = 3000;
  int densify_interval = 100;
  DensifyConfig densify;
  Rgb background = Rgb::Zero();
  std::uint64_t seed = 0;
};

/// Throws kInvalidArgument for non-positive iteration counts or thresholds.
void validate(const TrainConfig& config);

/// One supervised view; `weights` multiplies every loss term.
struct TrainView {
  CameraView camera;
  ImageBuffer image;
  GrayMap weights;
};

struct TrainResult {
  GaussianCloud cloud;
  std::vector<double> loss_log;
};

/// Radius of the camera centres around their mean, times 1.1.
double scene_extent(const std::vector<CameraView>& cameras);

/// Called after every optimizer step with the iteration number, current cloud, and view loss.
using TrainCallback = std::function<void(int, const GaussianCloud&, double)>;

TrainResult train(GaussianCloud cloud, const std::vector<TrainView>& views, const TrainConfig& config,
                  const TrainCallback& callback = {});

}  // namespace vista
