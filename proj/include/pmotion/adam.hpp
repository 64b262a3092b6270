#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "pmotion/tensor.hpp"

namespace pmotion::ad {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers are shaped like the parameters they track.
struct AdamState {
  AdamConfig config;
  std::uint64_t step = 0;
  std::vector<Tensor> m;
  std::vector<Tensor> v;

  AdamState() = default;
  AdamState(AdamConfig cfg, std::span<const Tensor> params);
};

// One bias-corrected Adam update, in place.
void adam_step(AdamState& state, std::span<Tensor> params, std::span<const Tensor> grads);

}  // namespace pmotion::ad
