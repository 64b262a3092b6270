#pragma once
// PMCKPT/1 checkpoints.
//
//   "PMCKPT" 0x01
//   u32 config length, config text (key=value lines)
//   records: u32 name length, name, u32 rank, u32 dims[rank], f64 payload[prod(dims)]
//   u32 0   (end marker)
//
// All integers and doubles are little-endian.

#include <filesystem>
#include <optional>
#include <string>

#include "pmotion/adam.hpp"
#include "pmotion/params.hpp"

namespace pmotion {

struct Checkpoint {
  std::string config_text;
  ParamSet params;
  std::optional<ad::AdamState> optimizer;

  bool operator==(const Checkpoint& other) const;
};

std::string encode_checkpoint(const Checkpoint& ckpt);
// Throws BadMagic, VersionMismatch or TruncatedFile.
Checkpoint decode_checkpoint(std::string_view bytes);

void checkpoint_save(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint checkpoint_load(const std::filesystem::path& path);

}  // namespace pmotion
