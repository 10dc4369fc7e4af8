#pragma once

#include <cstddef>
#include <vector>

#include <Eigen/Core>

namespace vista {

inline constexpr double kShC0 = 0.28209479177387814;

inline int sh_coeff_count(int degree) { return (degree + 1) * (degree + 1); }

/// Per-splat parameter arrays. Shared by the cloud itself, its gradients, and optimizer moments.
struct SplatArrays {
  std::vector<Eigen::Vector3d> means;
  std::vector<Eigen::Vector3d> log_scales;
  std::vector<Eigen::Vector4d> rotations;  // (w, x, y, z)
  std::vector<double> opacity_logits;
  std::vector<double> sh;  // per splat: sh_coeff_count(degree) RGB triples, coefficient-major

  std::size_t size() const { return means.size(); }
  void resize(std::size_t n, int sh_degree);
  void set_zero();
  /// Keeps the splats whose flag is true, preserving order.
  void keep(const std::vector<bool>& flags, int sh_degree);
  /// Appends splat `j` of `src` (same degree).
  void append_from(const SplatArrays& src, std::size_t j, int sh_degree);
};

class GaussianCloud : public SplatArrays {
 public:
  int sh_degree = 1;

  std::size_t sh_stride() const { return static_cast<std::size_t>(sh_coeff_count(sh_degree)) * 3; }
  double* sh_of(std::size_t j) { return sh.data() + j * sh_stride(); }
  const double* sh_of(std::size_t j) const { return sh.data() + j * sh_stride(); }

  double opacity(std::size_t j) const;
  Eigen::Matrix3d rotation_matrix(std::size_t j) const;
  Eigen::Matrix3d covariance(std::size_t j) const;

  /// Adds one splat with a degree-0 colour; higher SH bands start at zero.
  void add_splat(const Eigen::Vector3d& mean, const Eigen::Vector3d& log_scale,
                 const Eigen::Vector4d& rotation, double opacity_logit, const Eigen::Vector3d& rgb);

  /// Throws kInvalidArgument when array lengths disagree or the degree is outside [0, 3].
  void validate() const;
};

double sigmoid(double x);
double logit(double p);

/// Rotation matrix of a (w, x, y, z) quaternion; the quaternion is normalised first.
Eigen::Matrix3d quaternion_to_matrix(const Eigen::Vector4d& q);

}  // namespace vista
