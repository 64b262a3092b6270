#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "pmotion/model.hpp"
#include "pmotion/motion.hpp"

namespace pmotion {

struct RolloutConfig {
  std::size_t seed_frames = 1;
  std::size_t frames = 600;  // frames to generate after the seed
  std::size_t samples = 3;
  std::uint64_t rng_seed = 0;
  bool deterministic = false;

  void validate() const;
};

struct RolloutSample {
  MotionSequence motion;    // seed frames followed by generated frames
  std::size_t given_frames = 0;
  bool ok = true;
  std::string error;        // set when generation stopped early

  bool generated(std::size_t frame) const noexcept { return frame >= given_frames; }
};

// Warms the recurrent state on the seed frames (outputs discarded), then
// feeds each generated frame back as the next input. Sample k draws its
// latents from Rng::derive(rng_seed, k). A non-finite value stops that sample
// and returns the frames produced so far with ok = false.
std::vector<RolloutSample> generate(const Model& model, const MotionSequence& seed_seq,
                                    const RolloutConfig& config);

// ceil(fraction * length), at least 1 and at most length.
std::size_t seed_frames_for_fraction(double fraction, std::size_t length);

// `<dir>/sample_<k>.pmf` plus `<dir>/sample_<k>.boundary` holding the index
// of the first generated frame.
void write_rollout(const std::vector<RolloutSample>& samples, const std::filesystem::path& dir);
std::size_t read_boundary_file(const std::filesystem::path& path);

}  // namespace pmotion
