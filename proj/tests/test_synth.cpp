#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>

#include "pmotion/eval.hpp"
#include "pmotion/rotation.hpp"
#include "pmotion/synth.hpp"

using namespace pmotion;

TEST(Synth, ZeroAmplitudeAndVelocityIsStatic) {
  const auto seq = synth_generate(SkeletonSpec::uniform(22, 0.0, 1.0), 30, 20, 1);
  for (std::size_t i = 1; i < seq.frame_count(); ++i) {
    for (std::size_t d = 0; d < seq.frame_dim(); ++d) EXPECT_EQ(seq.frame(i)[d], seq.frame(0)[d]);
  }
}

TEST(Synth, TranslationIsVelocityTimesTime) {
  SkeletonSpec spec = SkeletonSpec::uniform(3, 0.2, 1.0);
  spec.velocity = {1.0, 0.0, 0.0};
  const auto seq = synth_generate(spec, 30, 61, 2);
  EXPECT_NEAR(seq.translation(60)[0], 2.0, 1e-12);
  EXPECT_EQ(seq.translation(60)[1], 0.0);
  EXPECT_EQ(seq.translation(60)[2], 0.0);
}

TEST(Synth, SameSeedSameSequence) {
  const auto spec = SkeletonSpec::uniform(5, 0.4, 0.7, 0.3);
  EXPECT_EQ(synth_generate(spec, 30, 30, 3), synth_generate(spec, 30, 30, 3));
  EXPECT_NE(synth_generate(spec, 30, 30, 3), synth_generate(spec, 30, 30, 4));
}

TEST(Synth, NyquistIsEnforced) {
  EXPECT_THROW(synth_generate(SkeletonSpec::uniform(2, 0.1, 15.0), 30, 10, 0), NyquistViolation);
  EXPECT_THROW(synth_generate(SkeletonSpec::uniform(2, 0.1, 20.0), 30, 10, 0), NyquistViolation);
  EXPECT_NO_THROW(synth_generate(SkeletonSpec::uniform(2, 0.1, 14.9), 30, 10, 0));
}

TEST(Synth, RotationsAreValid) {
  SynthRanges r;
  for (const auto& seq : synth_dataset(3, 22, 30, 40, r, 5)) {
    for (std::size_t i = 0; i < seq.frame_count(); ++i) {
      for (std::size_t j = 0; j < 22; ++j) {
        const auto m = rot6d_to_matrix(seq.joint_rotation(i, j));
        EXPECT_LE((m.transpose() * m - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-12);
      }
    }
  }
}

TEST(Synth, DatasetRespectsRanges) {
  SynthRanges r;
  const auto ds = synth_dataset(10, 22, 30, 600, r, 1);
  ASSERT_EQ(ds.size(), 10u);
  for (const auto& seq : ds) {
    EXPECT_EQ(seq.frame_count(), 600u);
    const double dx = seq.translation(1)[0] - seq.translation(0)[0];
    const double dy = seq.translation(1)[1] - seq.translation(0)[1];
    EXPECT_LE(std::hypot(dx, dy) * 30.0, r.speed_hi + 1e-12);
    EXPECT_EQ(seq.translation(599)[2], 0.0);
  }
}

// The signed angle of a joint oscillating at 2 Hz puts its spectral peak at
// 2 Hz: 150 frames at 30 fps is 5 s, so bin 10.
TEST(Synth, SingleJointSpectrumPeaksAtItsFrequency) {
  const auto seq = synth_generate(SkeletonSpec::uniform(1, 0.5, 2.0), 30, 150, 7);
  // sin(angle) * axis is the vee of the skew part of the matrix.
  std::vector<double> signal;
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    const Eigen::Matrix3d m = rot6d_to_matrix(seq.joint_rotation(i, 0));
    const Eigen::Vector3d v(m(2, 1) - m(1, 2), m(0, 2) - m(2, 0), m(1, 0) - m(0, 1));
    signal.push_back(v.x() + v.y() + v.z());
  }
  const auto s = power_spectrum(signal, signal.size(), 1);
  const auto w = s.dim(0);
  const auto peak = std::max_element(w.begin(), w.end()) - w.begin();
  EXPECT_EQ(peak, 10);
}
