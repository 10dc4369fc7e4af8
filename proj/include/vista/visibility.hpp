#pragma once

#include <vector>

#include "vista/camera.hpp"
#include "vista/gaussian_cloud.hpp"
#include "vista/image.hpp"
#include "vista/scene_io.hpp"

namespace vista {

/// The `v` views other than `i` whose camera centres are nearest to view i's; ties go to the
/// lower index. Result is ordered by distance. Throws kInvalidArgument when v is out of range.
std::vector<int> select_adjacent_views(const std::vector<CameraView>& cameras, int i, int v);

/// A view used to score a point: its camera, captured image, and depth rendered from the cloud.
struct ColorSource {
  const CameraView* camera;
  const ImageBuffer* image;
  const GrayMap* depth;
};

inline constexpr double kUncertaintySentinel = 1.0;

/// Population variance of the bilinear colours of `x` over the views where it projects inside the
/// frame and passes the relative depth test, averaged over RGB; the sentinel when fewer than two pass.
double point_uncertainty(const Eigen::Vector3d& x, const std::vector<ColorSource>& views, double tau_d);

struct UncertaintyOptions {
  int adjacent = 4;
  double tau_d = 0.05;
  /// Pixels whose rendered alpha is below this are not scored (raw value 0).
  double min_alpha = 0.5;
  /// Also sample the reference view's own image.
  bool include_reference = true;
  Rgb background = Rgb::Zero();
};

/// Scores every pixel of view i; raw values are divided by their standard deviation and clamped.
UncertaintyMap uncertainty_map(const GaussianCloud& cloud, const SceneDataset& dataset, int i,
                               const UncertaintyOptions& options);

/// The same scores before normalisation.
GrayMap raw_uncertainty_map(const GaussianCloud& cloud, const SceneDataset& dataset, int i,
                            const UncertaintyOptions& options);

/// Rendered depth and alpha for every view.
struct DepthSet {
  std::vector<GrayMap> depth;
  std::vector<GrayMap> alpha;
};
DepthSet render_depths(const GaussianCloud& cloud, const SceneDataset& dataset, const Rgb& background);

/// Maps for all views, sharing one set of depth renders.
std::vector<UncertaintyMap> uncertainty_maps(const GaussianCloud& cloud, const SceneDataset& dataset,
                                             const UncertaintyOptions& options);

/// Divides by the standard deviation of all values and clamps to [0,1]; all zero when std < 1e-8.
UncertaintyMap normalize_uncertainty(const GrayMap& raw);

/// M' = clamp(U (1 - M) + theta M, 0, 1).
MaskMap fuse_mask(const UncertaintyMap& u, const MaskMap& m, double theta);

}  // namespace vista
