#include "vista/gaussian_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vista/error.hpp"

namespace vista {

void SplatArrays::resize(std::size_t n, int sh_degree) {
  means.resize(n, Eigen::Vector3d::Zero());
  log_scales.resize(n, Eigen::Vector3d::Zero());
  rotations.resize(n, Eigen::Vector4d(1, 0, 0, 0));
  opacity_logits.resize(n, 0.0);
  sh.resize(n * sh_coeff_count(sh_degree) * 3, 0.0);
}

void SplatArrays::set_zero() {
  for (auto& v : means) v.setZero();
  for (auto& v : log_scales) v.setZero();
  for (auto& v : rotations) v.setZero();
  std::fill(opacity_logits.begin(), opacity_logits.end(), 0.0);
  std::fill(sh.begin(), sh.end(), 0.0);
}

void SplatArrays::keep(const std::vector<bool>& flags, int sh_degree) {
  const std::size_t stride = sh_coeff_count(sh_degree) * 3;
  std::size_t out = 0;
  for (std::size_t j = 0; j < size(); ++j) {
    if (!flags[j]) continue;
    if (out != j) {
      means[out] = means[j];
      log_scales[out] = log_scales[j];
      rotations[out] = rotations[j];
      opacity_logits[out] = opacity_logits[j];
      std::copy_n(sh.begin() + j * stride, stride, sh.begin() + out * stride);
    }
    ++out;
  }
  means.resize(out);
  log_scales.resize(out);
  rotations.resize(out);
  opacity_logits.resize(out);
  sh.resize(out * stride);
}

void SplatArrays::append_from(const SplatArrays& src, std::size_t j, int sh_degree) {
  const std::size_t stride = sh_coeff_count(sh_degree) * 3;
  means.push_back(src.means[j]);
  log_scales.push_back(src.log_scales[j]);
  rotations.push_back(src.rotations[j]);
  opacity_logits.push_back(src.opacity_logits[j]);
  sh.insert(sh.end(), src.sh.begin() + j * stride, src.sh.begin() + (j + 1) * stride);
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double logit(double p) { return std::log(p / (1.0 - p)); }

Eigen::Matrix3d quaternion_to_matrix(const Eigen::Vector4d& q) {
  const Eigen::Vector4d n = q.normalized();
  const double w = n[0], x = n[1], y = n[2], z = n[3];
  Eigen::Matrix3d r;
  r << 1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y),
      2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x),
      2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y);
  return r;
}

double GaussianCloud::opacity(std::size_t j) const { return sigmoid(opacity_logits[j]); }

Eigen::Matrix3d GaussianCloud::rotation_matrix(std::size_t j) const {
  return quaternion_to_matrix(rotations[j]);
}

Eigen::Matrix3d GaussianCloud::covariance(std::size_t j) const {
  const Eigen::Matrix3d m = rotation_matrix(j) * (2.0 * log_scales[j]).array().exp().matrix().asDiagonal();
  return m * rotation_matrix(j).transpose();
}

void GaussianCloud::add_splat(const Eigen::Vector3d& mean, const Eigen::Vector3d& log_scale,
                              const Eigen::Vector4d& rotation, double opacity_logit,
                              const Eigen::Vector3d& rgb) {
  means.push_back(mean);
  log_scales.push_back(log_scale);
  rotations.push_back(rotation.normalized());
  opacity_logits.push_back(opacity_logit);
  const std::size_t base = sh.size();
  sh.resize(base + sh_stride(), 0.0);
  for (int c = 0; c < 3; ++c) sh[base + c] = (rgb[c] - 0.5) / kShC0;
}

void GaussianCloud::validate() const {
  if (sh_degree < 0 || sh_degree > 3) {
    fail(ErrorKind::kInvalidArgument, "sh degree " + std::to_string(sh_degree) + " outside [0,3]");
  }
  const std::size_t n = means.size();
  if (log_scales.size() != n || rotations.size() != n || opacity_logits.size() != n ||
      sh.size() != n * sh_stride()) {
    fail(ErrorKind::kInvalidArgument, "splat arrays have inconsistent lengths");
  }
}

}  // namespace vista
