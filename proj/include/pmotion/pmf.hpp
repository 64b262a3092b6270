#pragma once
// PMF/1 motion files.
//
//   PMF 1 <fps> <J>
//   <3 + 6J space-separated numbers>     one line per frame
//
// Lines beginning with '#' are comments. Numbers are written in the shortest
// form that parses back to the same double, so write -> read -> write is
// byte-stable.

#include <filesystem>
#include <string>
#include <string_view>

#include "pmotion/motion.hpp"

namespace pmotion {

MotionSequence parse_motion(std::string_view text);
std::string format_motion(const MotionSequence& seq);

MotionSequence read_motion_file(const std::filesystem::path& path);
void write_motion_file(const MotionSequence& seq, const std::filesystem::path& path);

// Shortest round-trip decimal for a double ('.' separator regardless of locale).
std::string format_double(double value);

}  // namespace pmotion
