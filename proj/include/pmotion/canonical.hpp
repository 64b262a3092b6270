#pragma once

#include <Eigen/Core>

#include "pmotion/motion.hpp"

namespace pmotion {

// x_world = rotation * x_local + translation
struct RigidTransform {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  RigidTransform inverse() const;
  RigidTransform then(const RigidTransform& outer) const;  // outer * this
};

// Moves the pelvis translation through the transform and left-multiplies the
// pelvis rotation columns; the other joints are parent-relative and untouched.
MotionSequence apply_transform(const MotionSequence& seq, const RigidTransform& t);

struct Canonicalized {
  MotionSequence sequence;
  RigidTransform to_input;  // canonical -> original coordinates
};

// Re-expresses a Z-up sequence so that the first-frame pelvis sits at the
// origin and the first-frame horizontal left-to-right hip direction is +X.
// The hip direction is the pelvis frame's local +X axis.
// Throws DegeneratePose when that axis has no horizontal component.
Canonicalized canonicalize(const MotionSequence& seq);

}  // namespace pmotion
