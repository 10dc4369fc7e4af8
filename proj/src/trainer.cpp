#include "vista/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include <spdlog/spdlog.h>

#include "vista/backward.hpp"
#include "vista/error.hpp"

namespace vista {

void validate(const TrainConfig& config) {
  if (config.iterations <= 0) fail(ErrorKind::kInvalidArgument, "iterations must be positive");
  if (!(config.densify.grad_threshold > 0.0) || !(config.densify.prune_opacity > 0.0) ||
      config.densify_interval <= 0) {
    fail(ErrorKind::kInvalidArgument, "densify thresholds must be positive");
  }
  validate(config.lambda);
}

double scene_extent(const std::vector<CameraView>& cameras) {
  if (cameras.empty()) return 1.0;
  Eigen::Vector3d mean = Eigen::Vector3d::Zero();
  for (const auto& c : cameras) mean += c.center();
  mean /= static_cast<double>(cameras.size());
  double radius = 0.0;
  for (const auto& c : cameras) radius = std::max(radius, (c.center() - mean).norm());
  return 1.1 * std::max(radius, 1e-6);
}

TrainResult train(GaussianCloud cloud, const std::vector<TrainView>& views,
                  const TrainConfig& config, const TrainCallback& callback) {
  validate(config);
  if (views.empty()) fail(ErrorKind::kTooFewViews, "no training views");
  for (const auto& v : views) {
    require_same_size(v.image, v.weights, "training weights");
    if (v.image.width != v.camera.width || v.image.height != v.camera.height) {
      fail(ErrorKind::kDimensionMismatch, "camera " + std::to_string(v.camera.id) + " vs image");
    }
  }

  std::vector<CameraView> cameras;
  for (const auto& v : views) cameras.push_back(v.camera);
  const double extent = scene_extent(cameras);
  DensifyConfig densify = config.densify;
  densify.scene_extent = extent;

  AdamState state;
  state.reset(cloud);
  DensifyStats stats;
  stats.reset(cloud.size());
  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> order;
  std::size_t cursor = 0;

  TrainResult result;
  result.loss_log.reserve(config.iterations);
  for (int it = 1; it <= config.iterations; ++it) {
    if (cursor == order.size()) {
      order.resize(views.size());
      std::iota(order.begin(), order.end(), 0);
      std::shuffle(order.begin(), order.end(), rng);
      cursor = 0;
    }
    const TrainView& view = views[order[cursor++]];
    // Views whose weights are all zero carry no supervision.
    if (std::all_of(view.weights.data.begin(), view.weights.data.end(),
                    [](double w) { return w == 0.0; })) {
      result.loss_log.push_back(result.loss_log.empty() ? 0.0 : result.loss_log.back());
      continue;
    }

    const BackwardResult br =
        backward(cloud, view.camera, view.image, view.weights, config.lambda, config.background);
    result.loss_log.push_back(br.loss);

    LearningRates lr = config.lr;
    const double t = static_cast<double>(it - 1) / std::max(1, config.iterations - 1);
    lr.means = extent * std::exp(std::log(config.lr.means) * (1.0 - t) +
                                 std::log(config.means_lr_final) * t);
    adam_step(cloud, br.grads, state, lr);
    stats.add(br.grads);

    if (it >= config.densify_from && it <= config.densify_until &&
        it % config.densify_interval == 0 && it < config.iterations) {
      densify.seed = config.seed + static_cast<std::uint64_t>(it);
      const DensifyReport rep = densify_prune(cloud, stats, state, densify);
      spdlog::debug("iter {}: cloned {} split {} pruned {} -> {} splats", it, rep.cloned, rep.split,
                    rep.pruned, cloud.size());
    }
    if (callback) callback(it, cloud, br.loss);
  }
  result.cloud = std::move(cloud);
  return result;
}

}  // namespace vista
