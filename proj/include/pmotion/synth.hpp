#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "pmotion/motion.hpp"

namespace pmotion {

// Sinusoidal skeleton: joint j rotates about a fixed axis (drawn from the
// generator seed) by amplitude[j] * sin(2*pi*frequency[j]*t + phase[j]);
// the pelvis translates at constant velocity.
struct SkeletonSpec {
  std::size_t joint_count = kDefaultJointCount;
  std::vector<double> amplitude;  // radians
  std::vector<double> frequency;  // Hz
  std::vector<double> phase;      // radians
  std::array<double, 3> velocity{0.0, 0.0, 0.0};  // m/s

  static SkeletonSpec uniform(std::size_t joints, double amplitude, double frequency, double phase = 0.0);
};

// Throws NyquistViolation if any frequency >= fps / 2.
MotionSequence synth_generate(const SkeletonSpec& spec, int fps, std::size_t n_frames, std::uint64_t seed);

struct SynthRanges {
  double amplitude_lo = 0.1;
  double amplitude_hi = 0.6;
  double frequency_lo = 0.25;
  double frequency_hi = 2.0;
  double speed_lo = 0.0;  // horizontal pelvis speed, m/s
  double speed_hi = 0.3;
};

// Per-joint amplitude, frequency and phase drawn uniformly from `ranges`, plus
// a horizontal velocity with random heading.
SkeletonSpec random_skeleton(std::size_t joints, const SynthRanges& ranges, std::uint64_t seed);

// `count` sequences from independent random skeletons; sequence k uses seeds
// derived from (seed, k).
std::vector<MotionSequence> synth_dataset(std::size_t count, std::size_t joints, int fps, std::size_t n_frames,
                                          const SynthRanges& ranges, std::uint64_t seed);

}  // namespace pmotion
