#pragma once

#include <Eigen/Dense>

#include <span>
#include <vector>

// Small dense linear-algebra helpers shared by the theory layer and the
// backends. Composite systems use little-endian order: the first factor of
// a tensor product varies fastest.

namespace duo::linalg {

inline constexpr double kPositivityFloor = -1e-10;
inline constexpr double kHermitianTolerance = 1e-12;

/// Inverse by partial-pivot LU. `condition` receives sigma_max / sigma_min.
Eigen::MatrixXd inverse(const Eigen::MatrixXd& m, double* condition = nullptr);

/// sigma_max / sigma_min; +inf for a singular matrix.
double condition_number(const Eigen::MatrixXd& m);

/// sigma_min / sigma_max of the matrix whose rows are `rows`.
double relative_min_singular_value(const Eigen::MatrixXd& rows);

/// Real coordinates of a Hermitian N x N operator in an N^2-dimensional
/// real basis (diagonal, then Re/Im of the strict upper triangle).
Eigen::VectorXd hermitian_coordinates(const Eigen::MatrixXcd& h);

bool is_hermitian(const Eigen::MatrixXcd& h, double tol = kHermitianTolerance);
double min_eigenvalue(const Eigen::MatrixXcd& hermitian);
double max_eigenvalue(const Eigen::MatrixXcd& hermitian);

/// Standard Kronecker product (right factor fastest).
Eigen::MatrixXcd kron(const Eigen::MatrixXcd& a, const Eigen::MatrixXcd& b);
Eigen::VectorXd kron(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

/// Tensor product of factors in little-endian order (factors[0] fastest).
Eigen::MatrixXcd tensor(std::span<const Eigen::MatrixXcd> factors);
Eigen::VectorXd tensor(std::span<const Eigen::VectorXd> factors);

}  // namespace duo::linalg
