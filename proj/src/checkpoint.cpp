#include "pmotion/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

namespace pmotion {
namespace {

constexpr std::string_view kMagic = "PMCKPT";
constexpr std::uint8_t kVersion = 1;

constexpr std::string_view kMomentPrefix1 = "adam.m/";
constexpr std::string_view kMomentPrefix2 = "adam.v/";
constexpr std::string_view kAdamStep = "adam.step";
constexpr std::string_view kAdamHyper = "adam.hyper";

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f64(std::string& out, double d) {
  const auto v = std::bit_cast<std::uint64_t>(d);
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_record(std::string& out, std::string_view name, const ad::Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(name.size()));
  out.append(name);
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t d : t.shape()) put_u32(out, static_cast<std::uint32_t>(d));
  for (double v : t.data()) put_f64(out, v);
}

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  std::string_view take(std::size_t n) {
    if (bytes_.size() - pos_ < n) throw TruncatedFile("checkpoint ends unexpectedly at byte " + std::to_string(pos_));
    const auto out = bytes_.substr(pos_, n);
    pos_ += n;
    return out;
  }

  std::uint32_t u32() {
    const auto b = take(4);
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return v;
  }

  double f64() {
    const auto b = take(8);
    std::uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(static_cast<unsigned char>(b[i])) << (8 * i);
    return std::bit_cast<double>(v);
  }

  std::size_t remaining() const noexcept { return bytes_.size() - pos_; }

 private:
  std::string_view bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

bool Checkpoint::operator==(const Checkpoint& other) const {
  if (config_text != other.config_text || !(params == other.params)) return false;
  if (optimizer.has_value() != other.optimizer.has_value()) return false;
  if (!optimizer) return true;
  const auto& a = *optimizer;
  const auto& b = *other.optimizer;
  return a.step == b.step && a.m == b.m && a.v == b.v && a.config.lr == b.config.lr &&
         a.config.beta1 == b.config.beta1 && a.config.beta2 == b.config.beta2 && a.config.eps == b.config.eps;
}

std::string encode_checkpoint(const Checkpoint& ckpt) {
  std::string out(kMagic);
  out.push_back(static_cast<char>(kVersion));
  put_u32(out, static_cast<std::uint32_t>(ckpt.config_text.size()));
  out += ckpt.config_text;
  for (std::size_t i = 0; i < ckpt.params.size(); ++i) put_record(out, ckpt.params.name(i), ckpt.params[i]);
  if (ckpt.optimizer) {
    const auto& adam = *ckpt.optimizer;
    if (adam.m.size() != ckpt.params.size() || adam.v.size() != ckpt.params.size()) {
      throw ShapeMismatch("optimizer state does not match the parameter set");
    }
    put_record(out, kAdamHyper,
               ad::Tensor::vector({adam.config.lr, adam.config.beta1, adam.config.beta2, adam.config.eps}));
    put_record(out, kAdamStep, ad::Tensor::scalar(static_cast<double>(adam.step)));
    for (std::size_t i = 0; i < ckpt.params.size(); ++i) {
      put_record(out, std::string(kMomentPrefix1) + ckpt.params.name(i), adam.m[i]);
      put_record(out, std::string(kMomentPrefix2) + ckpt.params.name(i), adam.v[i]);
    }
  }
  put_u32(out, 0);
  return out;
}

Checkpoint decode_checkpoint(std::string_view bytes) {
  if (bytes.size() < kMagic.size() || bytes.substr(0, kMagic.size()) != kMagic) {
    throw BadMagic("not a PMCKPT checkpoint");
  }
  Reader r(bytes.substr(kMagic.size()));
  const auto version = static_cast<std::uint8_t>(r.take(1)[0]);
  if (version != kVersion) throw VersionMismatch("unsupported checkpoint version " + std::to_string(version));

  Checkpoint ckpt;
  ckpt.config_text = std::string(r.take(r.u32()));

  ParamSet moments_m, moments_v;
  std::optional<ad::Tensor> hyper, step;
  for (;;) {
    const std::uint32_t name_len = r.u32();
    if (name_len == 0) break;
    std::string name(r.take(name_len));
    const std::uint32_t rank = r.u32();
    std::vector<std::size_t> shape;
    for (std::uint32_t k = 0; k < rank; ++k) shape.push_back(r.u32());
    const std::size_t count = ad::Tensor::element_count(shape);
    if (count > r.remaining() / 8) throw TruncatedFile("record '" + name + "' payload is truncated");
    std::vector<double> data(count);
    for (double& v : data) v = r.f64();
    ad::Tensor t(std::move(shape), std::move(data));

    if (name == kAdamHyper) {
      hyper = std::move(t);
    } else if (name == kAdamStep) {
      step = std::move(t);
    } else if (name.starts_with(kMomentPrefix1)) {
      moments_m.add(name.substr(kMomentPrefix1.size()), std::move(t));
    } else if (name.starts_with(kMomentPrefix2)) {
      moments_v.add(name.substr(kMomentPrefix2.size()), std::move(t));
    } else {
      ckpt.params.add(std::move(name), std::move(t));
    }
  }

  if (hyper || step || moments_m.size() || moments_v.size()) {
    if (!hyper || !step || hyper->size() != 4 || step->size() != 1 || moments_m.names() != ckpt.params.names() ||
        moments_v.names() != ckpt.params.names()) {
      throw TruncatedFile("checkpoint optimizer state is incomplete");
    }
    ad::AdamState adam;
    adam.config = {(*hyper)[0], (*hyper)[1], (*hyper)[2], (*hyper)[3]};
    adam.step = static_cast<std::uint64_t>((*step)[0]);
    for (auto& t : moments_m.tensors()) t.set_requires_grad(false);
    for (auto& t : moments_v.tensors()) t.set_requires_grad(false);
    adam.m = std::move(moments_m.tensors());
    adam.v = std::move(moments_v.tensors());
    ckpt.optimizer = std::move(adam);
  }
  return ckpt;
}

void checkpoint_save(const Checkpoint& ckpt, const std::filesystem::path& path) {
  const std::string bytes = encode_checkpoint(ckpt);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed for " + path.string());
}

Checkpoint checkpoint_load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return decode_checkpoint(buf.str());
}

}  // namespace pmotion
