#pragma once

#include <Eigen/Core>

namespace vista {

/// Real SH basis values for a unit direction, up to `degree` (<= 3); writes (degree+1)^2 values.
void sh_basis(int degree, const Eigen::Vector3d& dir, double* out);

/// Basis values plus their Jacobian with respect to the (unit) direction components.
void sh_basis_with_jacobian(int degree, const Eigen::Vector3d& dir, double* out,
                            Eigen::Matrix<double, 16, 3>& jacobian);

/// Raw SH colour sum_k basis_k * coeffs[k] (no offset, no clamp). `coeffs` holds RGB triples.
Eigen::Vector3d eval_sh(int degree, const double* coeffs, const Eigen::Vector3d& dir);

}  // namespace vista
