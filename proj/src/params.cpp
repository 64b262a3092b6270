#include "pmotion/params.hpp"

#include <algorithm>

namespace pmotion {

std::size_t ParamSet::add(std::string name, ad::Tensor value) {
  if (find(name)) throw Error("duplicate parameter name '" + name + "'");
  names_.push_back(std::move(name));
  value.set_requires_grad(true);
  tensors_.push_back(std::move(value));
  return tensors_.size() - 1;
}

std::optional<std::size_t> ParamSet::find(std::string_view name) const {
  const auto it = std::find(names_.begin(), names_.end(), name);
  if (it == names_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - names_.begin());
}

std::size_t ParamSet::scalar_count() const noexcept {
  std::size_t n = 0;
  for (const auto& t : tensors_) n += t.size();
  return n;
}

BoundParams::BoundParams(ad::Tape& tape, const ParamSet& params) {
  vars_.reserve(params.size());
  for (const auto& t : params.tensors()) vars_.push_back(tape.parameter(t));
}

}  // namespace pmotion
