#include "pmotion/config.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "pmotion/pmf.hpp"

namespace pmotion {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

struct Field {
  std::function<void(Config&, std::string_view)> set;  // throws std::invalid_argument with a reason
  std::function<std::string(const Config&)> get;
};

double to_double(std::string_view v) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size() || !std::isfinite(out)) {
    throw std::invalid_argument("expected a number");
  }
  return out;
}

std::uint64_t to_u64(std::string_view v) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) throw std::invalid_argument("expected a nonnegative integer");
  return out;
}

bool to_bool(std::string_view v) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw std::invalid_argument("expected true or false");
}

void require(bool ok, const char* why) {
  if (!ok) throw std::invalid_argument(why);
}

std::string join(const std::vector<std::string>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ',';
    out += parts[i];
  }
  return out;
}

std::vector<std::string> split_paths(std::string_view v) {
  std::vector<std::string> out;
  while (!v.empty()) {
    const auto comma = v.find(',');
    const auto part = trim(v.substr(0, comma));
    if (!part.empty()) out.emplace_back(part);
    if (comma == std::string_view::npos) break;
    v.remove_prefix(comma + 1);
  }
  return out;
}

#define PM_SIZE(key, member, minimum)                                                   \
  {key,                                                                                 \
   {[](Config& c, std::string_view v) {                                                 \
      const auto n = to_u64(v);                                                         \
      require(n >= (minimum), "must be at least " #minimum);                            \
      c.member = static_cast<decltype(c.member)>(n);                                    \
    },                                                                                  \
    [](const Config& c) { return std::to_string(c.member); }}}

#define PM_REAL(key, member, check, why)                                                \
  {key,                                                                                 \
   {[](Config& c, std::string_view v) {                                                 \
      const double x = to_double(v);                                                    \
      require(check, why);                                                              \
      c.member = x;                                                                     \
    },                                                                                  \
    [](const Config& c) { return format_double(c.member); }}}

const std::map<std::string, Field, std::less<>>& fields() {
  static const std::map<std::string, Field, std::less<>> table = {
      PM_SIZE("window", train.window, 3),
      PM_SIZE("stride", train.stride, 1),
      PM_SIZE("steps", train.steps, 0),
      PM_REAL("lr", train.lr, x >= 0.0, "must be nonnegative"),
      PM_REAL("clip_norm", train.clip_norm, x > 0.0, "must be positive"),
      PM_REAL("alpha", train.alpha, x >= 0.0 && x < 1.0, "must satisfy 0 <= alpha < 1"),
      PM_SIZE("hidden", train.hidden, 1),
      PM_SIZE("latent", train.latent, 1),
      {"cell",
       {[](Config& c, std::string_view v) {
          if (v == "gru") c.train.cell = CellKind::Gru;
          else if (v == "lstm") c.train.cell = CellKind::Lstm;
          else throw std::invalid_argument("expected gru or lstm");
        },
        [](const Config& c) { return std::string(to_string(c.train.cell)); }}},
      {"model",
       {[](Config& c, std::string_view v) {
          if (v == "two-stream") c.train.model = ModelKind::TwoStream;
          else if (v == "vq") c.train.model = ModelKind::Vq;
          else if (v == "q") c.train.model = ModelKind::Q;
          else throw std::invalid_argument("expected two-stream, vq or q");
        },
        [](const Config& c) { return std::string(to_string(c.train.model)); }}},
      PM_SIZE("seed", train.seed, 0),
      PM_REAL("lambda_ts", train.weights.ts, x >= 0.0, "must be nonnegative"),
      PM_REAL("lambda_vp", train.weights.vp, x >= 0.0, "must be nonnegative"),
      PM_REAL("lambda_kl", train.weights.kl, x >= 0.0, "must be nonnegative"),
      {"kl_penalty",
       {[](Config& c, std::string_view v) {
          if (v == "charbonnier") c.train.kl_penalty = KlPenalty::Charbonnier;
          else if (v == "identity") c.train.kl_penalty = KlPenalty::Identity;
          else throw std::invalid_argument("expected charbonnier or identity");
        },
        [](const Config& c) { return std::string(to_string(c.train.kl_penalty)); }}},
      {"pose_prior",
       {[](Config& c, std::string_view v) {
          require(v == "none" || v == "squared_norm", "expected none or squared_norm");
          c.train.pose_prior = std::string(v);
        },
        [](const Config& c) { return c.train.pose_prior; }}},
      PM_SIZE("fps", train.fps, 1),
      PM_SIZE("joints", train.joints, 1),
      {"data",
       {[](Config& c, std::string_view v) { c.train.data = split_paths(v); },
        [](const Config& c) { return join(c.train.data); }}},
      PM_SIZE("checkpoint_every", train.checkpoint_every, 0),
      PM_SIZE("seed_frames", rollout.seed_frames, 1),
      PM_SIZE("frames", rollout.frames, 1),
      PM_SIZE("samples", rollout.samples, 1),
      PM_SIZE("rng_seed", rollout.rng_seed, 0),
      {"deterministic",
       {[](Config& c, std::string_view v) { c.rollout.deterministic = to_bool(v); },
        [](const Config& c) { return std::string(c.rollout.deterministic ? "true" : "false"); }}},
  };
  return table;
}

#undef PM_SIZE
#undef PM_REAL

}  // namespace

Config parse_config(std::string_view text) {
  Config config;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t eol = text.find('\n', pos);
    if (eol == std::string_view::npos) eol = text.size();
    const std::string_view line = trim(text.substr(pos, eol - pos));
    pos = eol + 1;
    ++line_no;
    if (line.empty() || line.front() == '#') continue;

    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw BadValue(std::string(line), line_no, "expected key=value");
    const std::string key(trim(line.substr(0, eq)));
    const std::string_view value = trim(line.substr(eq + 1));
    const auto it = fields().find(key);
    if (it == fields().end()) throw UnknownKey(key, line_no);
    try {
      it->second.set(config, value);
    } catch (const std::invalid_argument& e) {
      throw BadValue(key, line_no, e.what());
    }
  }
  return config;
}

Config load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string format_config(const Config& config) {
  std::string out;
  for (const auto& [key, field] : fields()) out += key + "=" + field.get(config) + "\n";
  return out;
}

}  // namespace pmotion
