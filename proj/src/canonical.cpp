#include "pmotion/canonical.hpp"

#include <cmath>

#include "pmotion/rotation.hpp"

namespace pmotion {

RigidTransform RigidTransform::inverse() const {
  RigidTransform inv;
  inv.rotation = rotation.transpose();
  inv.translation = -(inv.rotation * translation);
  return inv;
}

RigidTransform RigidTransform::then(const RigidTransform& outer) const {
  RigidTransform out;
  out.rotation = outer.rotation * rotation;
  out.translation = outer.rotation * translation + outer.translation;
  return out;
}

MotionSequence apply_transform(const MotionSequence& seq, const RigidTransform& t) {
  std::vector<double> values = seq.values();
  const std::size_t dim = seq.frame_dim();
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    double* f = values.data() + i * dim;
    const Eigen::Vector3d p = t.rotation * Eigen::Vector3d(f[0], f[1], f[2]) + t.translation;
    const Eigen::Vector3d c0 = t.rotation * Eigen::Vector3d(f[3], f[4], f[5]);
    const Eigen::Vector3d c1 = t.rotation * Eigen::Vector3d(f[6], f[7], f[8]);
    for (int k = 0; k < 3; ++k) {
      f[k] = p[k];
      f[3 + k] = c0[k];
      f[6 + k] = c1[k];
    }
  }
  return MotionSequence(seq.fps(), seq.joint_count(), std::move(values));
}

Canonicalized canonicalize(const MotionSequence& seq) {
  const Eigen::Matrix3d pelvis = rot6d_to_matrix(seq.joint_rotation(0, 0));
  const Eigen::Vector3d hip = pelvis.col(0);
  const double horizontal = std::hypot(hip.x(), hip.y());
  if (horizontal < 1e-9) throw DegeneratePose("first-frame hip direction is vertical");

  RigidTransform to_input;
  to_input.rotation = yaw(std::atan2(hip.y(), hip.x()));
  const auto t0 = seq.translation(0);
  to_input.translation = Eigen::Vector3d(t0[0], t0[1], t0[2]);

  MotionSequence canonical = apply_transform(seq, to_input.inverse());
  // Exact zero rather than whatever the inverse transform rounds to.
  auto f0 = canonical.frame(0);
  f0[0] = f0[1] = f0[2] = 0.0;
  return {std::move(canonical), to_input};
}

}  // namespace pmotion
