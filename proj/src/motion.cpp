#include "pmotion/motion.hpp"

#include <cmath>
#include <string>

namespace pmotion {

MotionSequence::MotionSequence(int fps, std::size_t joints, std::vector<double> values)
    : fps_(fps), joints_(joints), values_(std::move(values)) {
  if (fps_ <= 0) throw DomainError("fps must be positive");
  if (joints_ == 0) throw DomainError("joint count must be positive");
  if (values_.empty() || values_.size() % pmotion::frame_dim(joints_) != 0) {
    throw ShapeMismatch("motion values (" + std::to_string(values_.size()) +
                        ") are not a positive multiple of the frame dimension " +
                        std::to_string(pmotion::frame_dim(joints_)));
  }
}

void MotionSequence::append(std::span<const double> f) {
  if (f.size() != frame_dim()) throw ShapeMismatch("append: frame has wrong dimension");
  values_.insert(values_.end(), f.begin(), f.end());
}

MotionSequence MotionSequence::slice(std::size_t begin, std::size_t count) const {
  if (count == 0 || begin + count > frame_count()) throw ShapeMismatch("slice: frame range out of bounds");
  const auto first = values_.begin() + static_cast<std::ptrdiff_t>(begin * frame_dim());
  return MotionSequence(fps_, joints_,
                        std::vector<double>(first, first + static_cast<std::ptrdiff_t>(count * frame_dim())));
}

bool MotionSequence::all_finite() const noexcept {
  for (double v : values_)
    if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace pmotion
