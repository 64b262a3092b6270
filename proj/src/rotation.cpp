#include "pmotion/rotation.hpp"

#include <cmath>

#include <Eigen/Geometry>

#include "pmotion/errors.hpp"

namespace pmotion {
namespace {

// |a x b| below this fraction of |a||b| counts as parallel.
constexpr double kParallelTolerance = 1e-9;
constexpr double kRotationTolerance = 1e-6;

}  // namespace

bool is_decodable(std::span<const double, 6> v) noexcept {
  const Eigen::Vector3d a(v[0], v[1], v[2]);
  const Eigen::Vector3d b(v[3], v[4], v[5]);
  const double na = a.norm();
  const double nb = b.norm();
  if (!std::isfinite(na) || !std::isfinite(nb) || na == 0.0 || nb == 0.0) return false;
  return a.cross(b).norm() > kParallelTolerance * na * nb;
}

Eigen::Matrix3d rot6d_to_matrix(std::span<const double, 6> v) {
  if (!is_decodable(v)) throw DegenerateRotation("6D rotation has a zero or parallel column");
  const Eigen::Vector3d a(v[0], v[1], v[2]);
  const Eigen::Vector3d b(v[3], v[4], v[5]);
  const Eigen::Vector3d c0 = a.normalized();
  const Eigen::Vector3d c1 = (b - c0.dot(b) * c0).normalized();
  Eigen::Matrix3d m;
  m.col(0) = c0;
  m.col(1) = c1;
  m.col(2) = c0.cross(c1);
  return m;
}

Rot6d matrix_to_rot6d(const Eigen::Matrix3d& m) {
  const double orth = (m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  const double det = m.determinant();
  if (!(orth <= kRotationTolerance) || !(std::abs(det - 1.0) <= kRotationTolerance)) {
    throw NotARotation("matrix is not a proper rotation");
  }
  return {m(0, 0), m(1, 0), m(2, 0), m(0, 1), m(1, 1), m(2, 1)};
}

Eigen::Matrix3d axis_angle(const Eigen::Vector3d& unit_axis, double angle) {
  return Eigen::AngleAxisd(angle, unit_axis).toRotationMatrix();
}

Eigen::Matrix3d yaw(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d m;
  m << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return m;
}

}  // namespace pmotion
