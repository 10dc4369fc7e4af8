#pragma once

#include <optional>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vista {

/// Pinhole camera with a world-to-camera pose (OpenCV axes: x right, y down, z forward).
/// Pixel (x, y) is centred at continuous coordinate (x, y).
struct CameraView {
  int id = 0;
  double fx = 1.0;
  double fy = 1.0;
  double cx = 0.5;
  double cy = 0.5;
  int width = 1;
  int height = 1;
  Eigen::Quaterniond rotation = Eigen::Quaterniond::Identity();  // world -> camera
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();          // world -> camera

  Eigen::Matrix3d rotation_matrix() const { return rotation.normalized().toRotationMatrix(); }
  Eigen::Vector3d to_camera(const Eigen::Vector3d& world) const {
    return rotation_matrix() * world + translation;
  }
  Eigen::Vector3d center() const { return -(rotation_matrix().transpose() * translation); }
};

/// Throws kInvalidArgument when a camera invariant does not hold.
void validate_camera(const CameraView& camera);

/// Camera at `eye` looking at `target`; `up` is the approximate world up direction.
CameraView look_at_camera(int id, const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                          const Eigen::Vector3d& up, double focal, int width, int height);

struct PixelDepth {
  Eigen::Vector2d pixel;
  double depth = 0.0;
};

/// Projects a world point; nullopt when it lies at or behind the camera plane.
std::optional<PixelDepth> project_point(const Eigen::Vector3d& world, const CameraView& camera);

/// World point at `depth` along the ray through `pixel`. Throws kInvalidArgument for depth <= 0.
Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth, const CameraView& camera);

}  // namespace vista
