#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pmotion/errors.hpp"

namespace pmotion {

inline constexpr std::size_t kTranslationDim = 3;
inline constexpr std::size_t kRotationDim = 6;
inline constexpr std::size_t kDefaultJointCount = 22;

constexpr std::size_t frame_dim(std::size_t joints) noexcept { return kTranslationDim + kRotationDim * joints; }

// A motion clip: per frame, the global pelvis translation (3 values, meters)
// followed by one 6D rotation per joint in kinematic-tree order. Joint 0 is
// the pelvis and its rotation is global; the rest are parent-relative.
//
// Frames are stored contiguously, row-major.
class MotionSequence {
 public:
  MotionSequence(int fps, std::size_t joints, std::vector<double> values);

  int fps() const noexcept { return fps_; }
  std::size_t joint_count() const noexcept { return joints_; }
  std::size_t frame_dim() const noexcept { return pmotion::frame_dim(joints_); }
  std::size_t frame_count() const noexcept { return values_.size() / frame_dim(); }

  std::span<const double> frame(std::size_t i) const { return {values_.data() + i * frame_dim(), frame_dim()}; }
  std::span<double> frame(std::size_t i) { return {values_.data() + i * frame_dim(), frame_dim()}; }
  std::span<const double> translation(std::size_t i) const { return frame(i).first(kTranslationDim); }
  std::span<const double> pose(std::size_t i) const { return frame(i).subspan(kTranslationDim); }
  std::span<const double, kRotationDim> joint_rotation(std::size_t i, std::size_t joint) const {
    return std::span<const double, kRotationDim>(frame(i).data() + kTranslationDim + kRotationDim * joint,
                                                 kRotationDim);
  }

  const std::vector<double>& values() const noexcept { return values_; }

  void append(std::span<const double> frame);
  // Frames [begin, begin + count).
  MotionSequence slice(std::size_t begin, std::size_t count) const;

  bool all_finite() const noexcept;

  bool operator==(const MotionSequence&) const = default;

 private:
  int fps_;
  std::size_t joints_;
  std::vector<double> values_;
};

}  // namespace pmotion
