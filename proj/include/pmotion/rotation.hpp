#pragma once

#include <array>
#include <span>

#include <Eigen/Core>

namespace pmotion {

using Rot6d = std::array<double, 6>;

// Gram-Schmidt decode of a 6D rotation: the first triple is the first matrix
// column (normalized), the second triple is orthogonalized against it, and
// the third column is their cross product.
// Throws DegenerateRotation for a zero first triple or parallel triples.
Eigen::Matrix3d rot6d_to_matrix(std::span<const double, 6> v);

// First two columns of M, column-major. Throws NotARotation if M is not
// orthonormal with determinant +1 to within 1e-6.
Rot6d matrix_to_rot6d(const Eigen::Matrix3d& m);

// True when rot6d_to_matrix would succeed.
bool is_decodable(std::span<const double, 6> v) noexcept;

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& unit_axis, double angle);
Eigen::Matrix3d yaw(double angle);

}  // namespace pmotion
