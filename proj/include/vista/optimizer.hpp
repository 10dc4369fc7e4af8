#pragma once

#include <cstdint>
#include <vector>

#include "vista/backward.hpp"
#include "vista/gaussian_cloud.hpp"

namespace vista {

struct LearningRates {
  double means = 1.6e-4;
  double sh_dc = 2.5e-3;
  double sh_rest = 2.5e-3 / 20.0;
  double opacity = 0.05;
  double scale = 5e-3;
  double rotation = 1e-3;
};

struct AdamState {
  SplatArrays m;
  SplatArrays v;
  long step = 0;

  void reset(const GaussianCloud& cloud);
};

inline constexpr double kAdamBeta1 = 0.9;
inline constexpr double kAdamBeta2 = 0.999;
inline constexpr double kAdamEps = 1e-15;

/// One Adam step. Moments decay for every splat; a splat whose gradient is entirely zero keeps its
/// parameters. Quaternions are renormalised afterwards.
void adam_step(GaussianCloud& cloud, const SplatArrays& grads, AdamState& state,
               const LearningRates& lr);

struct DensifyConfig {
  double grad_threshold = 2e-4;
  double percent_dense = 0.01;
  double prune_opacity = 0.005;
  double scene_extent = 1.0;
  std::size_t max_splats = 200000;
  std::uint64_t seed = 0;
};

/// Running mean of the screen-space gradient per splat over the views where it was visible.
struct DensifyStats {
  std::vector<double> grad_sum;
  std::vector<int> count;

  void reset(std::size_t n);
  void add(const GradientSet& grads);
};

struct DensifyReport {
  std::size_t cloned = 0;
  std::size_t split = 0;
  std::size_t pruned = 0;
};

/// Clone small and split large high-gradient splats, then prune transparent ones.
/// Optimizer rows follow their splats; new rows start at zero. Stats are reset.
DensifyReport densify_prune(GaussianCloud& cloud, DensifyStats& stats, AdamState& state,
                            const DensifyConfig& config);

}  // namespace vista
