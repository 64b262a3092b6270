#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <cmath>
#include <numbers>

#include "pmotion/errors.hpp"
#include "pmotion/random.hpp"
#include "pmotion/rotation.hpp"

using namespace pmotion;

namespace {

Eigen::Matrix3d random_rotation(Rng& rng) {
  Eigen::Vector3d axis;
  do {
    axis = {rng.normal(), rng.normal(), rng.normal()};
  } while (axis.norm() < 1e-3);
  return axis_angle(axis.normalized(), rng.uniform(-std::numbers::pi, std::numbers::pi));
}

Rot6d random_6d(Rng& rng) {
  Rot6d v;
  for (auto& x : v) x = rng.uniform(-2.0, 2.0);
  return v;
}

template <typename Derived>
double max_abs(const Eigen::MatrixBase<Derived>& m) {
  return m.cwiseAbs().maxCoeff();
}

TEST(Rot6d, CanonicalBasisIsIdentity) {
  const Rot6d v{1, 0, 0, 0, 1, 0};
  EXPECT_EQ(rot6d_to_matrix(v), Eigen::Matrix3d::Identity());
  const Rot6d s{2, 0, 0, 0, 3, 0};
  EXPECT_EQ(rot6d_to_matrix(s), Eigen::Matrix3d::Identity());
}

TEST(Rot6d, ColumnsFollowGramSchmidt) {
  const Rot6d v{0, 3, 0, 1, 1, 0};
  const Eigen::Matrix3d m = rot6d_to_matrix(v);
  EXPECT_NEAR(max_abs(m.col(0) - Eigen::Vector3d(0, 1, 0)), 0.0, 1e-15);
  EXPECT_NEAR(max_abs(m.col(1) - Eigen::Vector3d(1, 0, 0)), 0.0, 1e-15);
  EXPECT_NEAR(max_abs(m.col(2) - Eigen::Vector3d(0, 0, -1)), 0.0, 1e-15);
}

TEST(Rot6d, RandomInputsGiveRotations) {
  Rng rng(1);
  int checked = 0;
  while (checked < 1000) {
    const Rot6d v = random_6d(rng);
    if (!is_decodable(v)) continue;
    const Eigen::Matrix3d m = rot6d_to_matrix(v);
    EXPECT_LE(max_abs(m.transpose() * m - Eigen::Matrix3d::Identity()), 1e-9);
    EXPECT_NEAR(m.determinant(), 1.0, 1e-9);
    ++checked;
  }
}

TEST(Rot6d, PerColumnScaleInvariance) {
  Rng rng(2);
  for (int i = 0; i < 200; ++i) {
    const Rot6d v = random_6d(rng);
    if (!is_decodable(v)) continue;
    const double s1 = rng.uniform(0.01, 100.0);
    const double s2 = rng.uniform(0.01, 100.0);
    const Rot6d w{s1 * v[0], s1 * v[1], s1 * v[2], s2 * v[3], s2 * v[4], s2 * v[5]};
    EXPECT_LE(max_abs(rot6d_to_matrix(v) - rot6d_to_matrix(w)), 1e-12);
  }
}

TEST(Rot6d, DegenerateInputs) {
  EXPECT_THROW(rot6d_to_matrix(Rot6d{0, 0, 0, 0, 1, 0}), DegenerateRotation);
  EXPECT_THROW(rot6d_to_matrix(Rot6d{1, 0, 0, 2, 0, 0}), DegenerateRotation);
  EXPECT_THROW(rot6d_to_matrix(Rot6d{1, 0, 0, -3, 0, 0}), DegenerateRotation);
  EXPECT_THROW(rot6d_to_matrix(Rot6d{1, 0, 0, 0, 0, 0}), DegenerateRotation);
  EXPECT_FALSE(is_decodable(Rot6d{1, 1, 0, 2, 2, 0}));
  EXPECT_TRUE(is_decodable(Rot6d{1, 0, 0, 1, 1, 0}));
}

TEST(MatrixTo6d, KnownMatrices) {
  const Rot6d id = matrix_to_rot6d(Eigen::Matrix3d::Identity());
  EXPECT_EQ(id, (Rot6d{1, 0, 0, 0, 1, 0}));
  Eigen::Matrix3d rz;
  rz << 0, -1, 0, 1, 0, 0, 0, 0, 1;
  EXPECT_EQ(matrix_to_rot6d(rz), (Rot6d{0, 1, 0, -1, 0, 0}));
}

TEST(MatrixTo6d, RejectsNonRotations) {
  EXPECT_THROW(matrix_to_rot6d(2.0 * Eigen::Matrix3d::Identity()), NotARotation);
  Eigen::Matrix3d reflect = Eigen::Matrix3d::Identity();
  reflect(2, 2) = -1.0;
  EXPECT_THROW(matrix_to_rot6d(reflect), NotARotation);
  Eigen::Matrix3d nearly = Eigen::Matrix3d::Identity();
  nearly(0, 1) = 1e-8;  // within tolerance
  EXPECT_NO_THROW(matrix_to_rot6d(nearly));
}

TEST(MatrixTo6d, RoundTrip) {
  Rng rng(3);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Matrix3d r = random_rotation(rng);
    EXPECT_LE(max_abs(rot6d_to_matrix(matrix_to_rot6d(r)) - r), 1e-9);
  }
}

TEST(Yaw, MatchesAxisAngleAboutZ) {
  for (double a : {-2.0, -0.3, 0.0, 1.1, 3.0}) {
    EXPECT_LE(max_abs(yaw(a) - axis_angle(Eigen::Vector3d::UnitZ(), a)), 1e-15);
  }
}

}  // namespace
