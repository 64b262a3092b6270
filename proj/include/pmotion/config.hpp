#pragma once
// Flat key=value configuration, one entry per line, '#' comments.
//
// Keys (defaults in parentheses):
//   window (64) stride (32) steps (5000) lr (0.001) clip_norm (5)
//   alpha (0.9) hidden (64) latent (8) cell (gru|lstm) model (two-stream|vq|q)
//   seed (0) lambda_ts (5) lambda_vp (0.0001) lambda_kl (1)
//   kl_penalty (charbonnier|identity) pose_prior (none|squared_norm)
//   fps (30) joints (22) data (comma-separated paths, empty) checkpoint_every (0)
//   seed_frames (1) frames (600) samples (3) rng_seed (0) deterministic (false)

#include <filesystem>
#include <string>
#include <string_view>

#include "pmotion/rollout.hpp"
#include "pmotion/trainer.hpp"

namespace pmotion {

struct Config {
  TrainConfig train;
  RolloutConfig rollout;
};

// Throws UnknownKey or BadValue (both carry the key and line number).
Config parse_config(std::string_view text);
Config load_config(const std::filesystem::path& path);

// Every key, in a fixed order; parse_config(format_config(c)) == c.
std::string format_config(const Config& config);

}  // namespace pmotion
