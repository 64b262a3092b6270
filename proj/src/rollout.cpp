#include "pmotion/rollout.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "pmotion/pmf.hpp"
#include "pmotion/random.hpp"

namespace pmotion {

void RolloutConfig::validate() const {
  if (seed_frames < 1) throw DomainError("seed_frames must be >= 1");
  if (frames < 1) throw DomainError("frames must be >= 1");
  if (samples < 1) throw DomainError("samples must be >= 1");
}

std::vector<RolloutSample> generate(const Model& model, const MotionSequence& seed_seq,
                                    const RolloutConfig& config) {
  config.validate();
  if (seed_seq.joint_count() != model.config().joints) throw ShapeMismatch("seed joint count does not match model");
  if (config.seed_frames > seed_seq.frame_count()) {
    throw DomainError("seed sequence has " + std::to_string(seed_seq.frame_count()) + " frames, " +
                      std::to_string(config.seed_frames) + " requested");
  }
  const MotionSequence seed = seed_seq.slice(0, config.seed_frames);

  std::vector<RolloutSample> out;
  out.reserve(config.samples);
  for (std::size_t k = 0; k < config.samples; ++k) {
    Rng rng = Rng::derive(config.rng_seed, k);
    Stepper stepper(model);
    RolloutSample sample{seed, config.seed_frames, true, {}};
    try {
      for (std::size_t i = 0; i + 1 < config.seed_frames; ++i) stepper.step(seed.frame(i), rng, config.deterministic);
      std::vector<double> prev(seed.frame(config.seed_frames - 1).begin(), seed.frame(config.seed_frames - 1).end());
      for (std::size_t n = 0; n < config.frames; ++n) {
        auto next = stepper.step(prev, rng, config.deterministic).next_frame;
        sample.motion.append(next);
        prev = std::move(next);
      }
    } catch (const NumericFault& e) {
      sample.ok = false;
      sample.error = e.what();
    }
    out.push_back(std::move(sample));
  }
  return out;
}

std::size_t seed_frames_for_fraction(double fraction, std::size_t length) {
  if (!(fraction > 0.0 && fraction <= 1.0)) throw DomainError("seed fraction must be in (0, 1]");
  // The small slack keeps e.g. 0.1 * 600 from rounding up to 61.
  const double raw = fraction * static_cast<double>(length);
  auto n = static_cast<std::size_t>(std::ceil(raw - 1e-9 * std::max(1.0, raw)));
  return std::clamp<std::size_t>(n, 1, length);
}

void write_rollout(const std::vector<RolloutSample>& samples, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  for (std::size_t k = 0; k < samples.size(); ++k) {
    const std::string stem = "sample_" + std::to_string(k);
    write_motion_file(samples[k].motion, dir / (stem + ".pmf"));
    std::ofstream b(dir / (stem + ".boundary"), std::ios::binary | std::ios::trunc);
    if (!b) throw IoError("cannot write boundary file for " + stem);
    b << samples[k].given_frames << '\n';
  }
}

std::size_t read_boundary_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  long long n = -1;
  in >> n;
  if (!in || n < 0) throw FormatError(1, "boundary file must hold a nonnegative frame index");
  return static_cast<std::size_t>(n);
}

}  // namespace pmotion
