#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "vista/camera.hpp"
#include "vista/gaussian_cloud.hpp"
#include "vista/image.hpp"

namespace vista {

struct SceneView {
  CameraView camera;
  ImageBuffer image;
  MaskMap mask;  // 1 = region to remove
  std::string image_name;  // file name under images/
};

struct SfmPoint {
  Eigen::Vector3d position;
  Rgb color;
};

struct SceneDataset {
  std::string name;
  std::vector<SceneView> views;
  std::vector<SfmPoint> points;

  std::vector<CameraView> cameras() const;
  /// Index of the view with camera id `id`, or -1.
  int index_of(int camera_id) const;
};

/// Throws on any violated dataset invariant.
void validate(const SceneDataset& dataset);

/// Layout: images/<id>.png (stem parses to the camera id), optional masks/ mirroring images/,
/// cameras.json, optional points3d.ply.
SceneDataset load_dataset(const std::filesystem::path& dir);

/// Writes the layout read by load_dataset. Masks are written only when `with_masks` is set.
void save_dataset(const std::filesystem::path& dir, const SceneDataset& dataset, bool with_masks);

std::vector<CameraView> read_cameras_json(const std::filesystem::path& path);
void write_cameras_json(const std::filesystem::path& path, const std::vector<CameraView>& cameras);

std::vector<SfmPoint> read_points_ply(const std::filesystem::path& path);
void write_points_ply(const std::filesystem::path& path, const std::vector<SfmPoint>& points);

std::string image_file_name(int camera_id);

struct InitConfig {
  int sh_degree = 1;
  double initial_opacity = 0.1;
  double min_spacing = 1e-4;
};

/// One isotropic splat per point, sized by the mean distance to its 3 nearest neighbours.
GaussianCloud init_cloud(const std::vector<SfmPoint>& points, const InitConfig& config = {});

}  // namespace vista
