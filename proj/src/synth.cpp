#include "pmotion/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "pmotion/random.hpp"
#include "pmotion/rotation.hpp"

namespace pmotion {

SkeletonSpec SkeletonSpec::uniform(std::size_t joints, double amplitude, double frequency, double phase) {
  SkeletonSpec s;
  s.joint_count = joints;
  s.amplitude.assign(joints, amplitude);
  s.frequency.assign(joints, frequency);
  s.phase.assign(joints, phase);
  return s;
}

MotionSequence synth_generate(const SkeletonSpec& spec, int fps, std::size_t n_frames, std::uint64_t seed) {
  const std::size_t J = spec.joint_count;
  if (J == 0) throw DomainError("skeleton needs at least one joint");
  if (fps <= 0) throw DomainError("fps must be positive");
  if (n_frames == 0) throw DomainError("n_frames must be at least 1");
  if (spec.amplitude.size() != J || spec.frequency.size() != J || spec.phase.size() != J) {
    throw ShapeMismatch("skeleton spec arrays must have joint_count entries");
  }
  const double nyquist = 0.5 * fps;
  for (std::size_t j = 0; j < J; ++j) {
    if (!(spec.frequency[j] < nyquist) || spec.frequency[j] < 0.0) {
      throw NyquistViolation("joint " + std::to_string(j) + " frequency " + std::to_string(spec.frequency[j]) +
                             " Hz is not below fps/2 = " + std::to_string(nyquist));
    }
    if (!(spec.amplitude[j] >= 0.0)) throw DomainError("amplitudes must be nonnegative");
  }

  Rng rng(seed);
  std::vector<Eigen::Vector3d> axes(J);
  for (auto& axis : axes) {
    do {
      axis = Eigen::Vector3d(rng.normal(), rng.normal(), rng.normal());
    } while (axis.norm() < 1e-6);
    axis.normalize();
  }

  const std::size_t dim = frame_dim(J);
  std::vector<double> values(n_frames * dim);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const double t = static_cast<double>(i) / fps;
    double* f = values.data() + i * dim;
    for (int k = 0; k < 3; ++k) f[k] = spec.velocity[k] * t;
    for (std::size_t j = 0; j < J; ++j) {
      const double angle =
          spec.amplitude[j] * std::sin(2.0 * std::numbers::pi * spec.frequency[j] * t + spec.phase[j]);
      const Rot6d r = matrix_to_rot6d(axis_angle(axes[j], angle));
      std::copy(r.begin(), r.end(), f + kTranslationDim + kRotationDim * j);
    }
  }
  return MotionSequence(fps, J, std::move(values));
}

SkeletonSpec random_skeleton(std::size_t joints, const SynthRanges& ranges, std::uint64_t seed) {
  Rng rng(seed);
  SkeletonSpec s;
  s.joint_count = joints;
  for (std::size_t j = 0; j < joints; ++j) {
    s.amplitude.push_back(rng.uniform(ranges.amplitude_lo, ranges.amplitude_hi));
    s.frequency.push_back(rng.uniform(ranges.frequency_lo, ranges.frequency_hi));
    s.phase.push_back(rng.uniform(0.0, 2.0 * std::numbers::pi));
  }
  const double speed = rng.uniform(ranges.speed_lo, ranges.speed_hi);
  const double heading = rng.uniform(0.0, 2.0 * std::numbers::pi);
  s.velocity = {speed * std::cos(heading), speed * std::sin(heading), 0.0};
  return s;
}

std::vector<MotionSequence> synth_dataset(std::size_t count, std::size_t joints, int fps, std::size_t n_frames,
                                          const SynthRanges& ranges, std::uint64_t seed) {
  std::vector<MotionSequence> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    const std::uint64_t child = mix64(seed) ^ mix64(k + 1);
    out.push_back(synth_generate(random_skeleton(joints, ranges, child), fps, n_frames, mix64(child)));
  }
  return out;
}

}  // namespace pmotion
