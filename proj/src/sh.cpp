#include "vista/sh.hpp"

#include <unsupported/Eigen/AutoDiff>

namespace vista {

namespace {

constexpr double kC0 = 0.28209479177387814;
constexpr double kC1 = 0.4886025119029199;
constexpr double kC2[] = {1.0925484305920792, -1.0925484305920792, 0.31539156525252005,
                          -1.0925484305920792, 0.5462742152960396};
constexpr double kC3[] = {-0.5900435899266435, 2.890611442640554, -0.4570457994644658,
                          0.3731763325901154,  -0.4570457994644658, 1.445305721320277,
                          -0.5900435899266435};

template <typename T>
void basis(int degree, const T& x, const T& y, const T& z, T* out) {
  out[0] = T(kC0);
  if (degree < 1) return;
  out[1] = -kC1 * y;
  out[2] = kC1 * z;
  out[3] = -kC1 * x;
  if (degree < 2) return;
  const T xx = x * x, yy = y * y, zz = z * z;
  const T xy = x * y, yz = y * z, xz = x * z;
  out[4] = kC2[0] * xy;
  out[5] = kC2[1] * yz;
  out[6] = kC2[2] * (2.0 * zz - xx - yy);
  out[7] = kC2[3] * xz;
  out[8] = kC2[4] * (xx - yy);
  if (degree < 3) return;
  out[9] = kC3[0] * y * (3.0 * xx - yy);
  out[10] = kC3[1] * xy * z;
  out[11] = kC3[2] * y * (4.0 * zz - xx - yy);
  out[12] = kC3[3] * z * (2.0 * zz - 3.0 * xx - 3.0 * yy);
  out[13] = kC3[4] * x * (4.0 * zz - xx - yy);
  out[14] = kC3[5] * z * (xx - yy);
  out[15] = kC3[6] * x * (xx - 3.0 * yy);
}

}  // namespace

void sh_basis(int degree, const Eigen::Vector3d& dir, double* out) {
  basis(degree, dir.x(), dir.y(), dir.z(), out);
}

void sh_basis_with_jacobian(int degree, const Eigen::Vector3d& dir, double* out,
                            Eigen::Matrix<double, 16, 3>& jacobian) {
  using Ad = Eigen::AutoDiffScalar<Eigen::Vector3d>;
  const Ad x(dir.x(), 3, 0), y(dir.y(), 3, 1), z(dir.z(), 3, 2);
  Ad values[16];
  basis(degree, x, y, z, values);
  jacobian.setZero();
  const int n = (degree + 1) * (degree + 1);
  for (int k = 0; k < n; ++k) {
    out[k] = values[k].value();
    if (k > 0) jacobian.row(k) = values[k].derivatives().transpose();
  }
}

Eigen::Vector3d eval_sh(int degree, const double* coeffs, const Eigen::Vector3d& dir) {
  double b[16];
  sh_basis(degree, dir, b);
  Eigen::Vector3d c = Eigen::Vector3d::Zero();
  const int n = (degree + 1) * (degree + 1);
  for (int k = 0; k < n; ++k) {
    c += b[k] * Eigen::Vector3d(coeffs[3 * k], coeffs[3 * k + 1], coeffs[3 * k + 2]);
  }
  return c;
}

}  // namespace vista
