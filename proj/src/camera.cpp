#include "vista/camera.hpp"

#include <cmath>
#include <string>

#include "vista/error.hpp"

namespace vista {

void validate_camera(const CameraView& camera) {
  const std::string tag = "camera " + std::to_string(camera.id);
  if (std::abs(camera.rotation.norm() - 1.0) > 1e-6) {
    fail(ErrorKind::kInvalidArgument, tag + ": quaternion is not unit length");
  }
  if (!(camera.fx > 0.0) || !(camera.fy > 0.0)) {
    fail(ErrorKind::kInvalidArgument, tag + ": focal lengths must be positive");
  }
  if (camera.width <= 0 || camera.height <= 0) {
    fail(ErrorKind::kInvalidArgument, tag + ": non-positive resolution");
  }
  if (!(camera.cx > 0.0 && camera.cx < camera.width) ||
      !(camera.cy > 0.0 && camera.cy < camera.height)) {
    fail(ErrorKind::kInvalidArgument, tag + ": principal point outside the image");
  }
  if (!camera.translation.allFinite()) {
    fail(ErrorKind::kInvalidArgument, tag + ": non-finite translation");
  }
}

CameraView look_at_camera(int id, const Eigen::Vector3d& eye, const Eigen::Vector3d& target,
                          const Eigen::Vector3d& up, double focal, int width, int height) {
  const Eigen::Vector3d forward = (target - eye).normalized();
  const Eigen::Vector3d right = forward.cross(up).normalized();
  const Eigen::Vector3d down = forward.cross(right);
  Eigen::Matrix3d r;
  r.row(0) = right.transpose();
  r.row(1) = down.transpose();
  r.row(2) = forward.transpose();

  CameraView cam;
  cam.id = id;
  cam.fx = focal;
  cam.fy = focal;
  cam.cx = 0.5 * (width - 1);
  cam.cy = 0.5 * (height - 1);
  cam.width = width;
  cam.height = height;
  cam.rotation = Eigen::Quaterniond(r).normalized();
  cam.translation = -(r * eye);
  return cam;
}

std::optional<PixelDepth> project_point(const Eigen::Vector3d& world, const CameraView& camera) {
  const Eigen::Vector3d p = camera.to_camera(world);
  if (!(p.z() > 0.0)) return std::nullopt;
  PixelDepth out;
  out.pixel = {camera.fx * p.x() / p.z() + camera.cx, camera.fy * p.y() / p.z() + camera.cy};
  out.depth = p.z();
  return out;
}

Eigen::Vector3d unproject(const Eigen::Vector2d& pixel, double depth, const CameraView& camera) {
  if (!(depth > 0.0)) fail(ErrorKind::kInvalidArgument, "unproject: depth must be positive");
  const Eigen::Vector3d cam_point(depth * (pixel.x() - camera.cx) / camera.fx,
                                  depth * (pixel.y() - camera.cy) / camera.fy, depth);
  return camera.rotation_matrix().transpose() * (cam_point - camera.translation);
}

}  // namespace vista
