#include "pmotion/pmf.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <vector>

namespace pmotion {
namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
    const std::size_t start = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') ++i;
    if (i > start) out.push_back(line.substr(start, i - start));
  }
  return out;
}

bool parse_number(std::string_view field, double& out) {
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

template <class Int>
bool parse_integer(std::string_view field, Int& out) {
  const auto* end = field.data() + field.size();
  const auto [ptr, ec] = std::from_chars(field.data(), end, out);
  return ec == std::errc() && ptr == end;
}

}  // namespace

std::string format_double(double value) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc()) throw Error("format_double: conversion failed");
  return std::string(buf, ptr);
}

MotionSequence parse_motion(std::string_view text) {
  bool have_header = false;
  int fps = 0;
  std::size_t joints = 0;
  std::size_t columns = 0;
  std::vector<double> values;

  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (!line.empty() && line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (fields.empty()) continue;

    if (!have_header) {
      if (fields.size() != 4 || fields[0] != "PMF") throw FormatError(line_no, "missing 'PMF 1 <fps> <J>' header");
      int version = 0;
      if (!parse_integer(fields[1], version)) throw FormatError(line_no, "bad version field");
      if (version != 1) throw FormatError(line_no, "unsupported PMF version " + std::string(fields[1]));
      if (!parse_integer(fields[2], fps) || fps <= 0) throw FormatError(line_no, "fps must be a positive integer");
      if (!parse_integer(fields[3], joints) || joints == 0) {
        throw FormatError(line_no, "joint count must be a positive integer");
      }
      columns = frame_dim(joints);
      have_header = true;
      continue;
    }

    if (fields.size() != columns) {
      throw FormatError(line_no, "expected " + std::to_string(columns) + " columns, found " +
                                     std::to_string(fields.size()));
    }
    for (const auto field : fields) {
      double v = 0.0;
      if (!parse_number(field, v)) throw FormatError(line_no, "not a number: '" + std::string(field) + "'");
      if (!std::isfinite(v)) throw FormatError(line_no, "non-finite value");
      values.push_back(v);
    }
  }
  if (!have_header) throw FormatError(0, "empty motion file");
  if (values.empty()) throw FormatError(0, "motion file has no frames");
  return MotionSequence(fps, joints, std::move(values));
}

std::string format_motion(const MotionSequence& seq) {
  if (!seq.all_finite()) throw FormatError(0, "refusing to write non-finite motion values");
  std::string out = "PMF 1 " + std::to_string(seq.fps()) + " " + std::to_string(seq.joint_count()) + "\n";
  out.reserve(out.size() + seq.values().size() * 20);
  for (std::size_t i = 0; i < seq.frame_count(); ++i) {
    const auto f = seq.frame(i);
    for (std::size_t k = 0; k < f.size(); ++k) {
      if (k) out.push_back(' ');
      out += format_double(f[k]);
    }
    out.push_back('\n');
  }
  return out;
}

MotionSequence read_motion_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_motion(buf.str());
}

void write_motion_file(const MotionSequence& seq, const std::filesystem::path& path) {
  const std::string text = format_motion(seq);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace pmotion
