#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pmotion/tape.hpp"
#include "pmotion/tensor.hpp"

namespace pmotion {

// Named parameter tensors in registration order. Order is part of the
// checkpoint contract and of the optimizer-state layout.
class ParamSet {
 public:
  std::size_t add(std::string name, ad::Tensor value);

  std::size_t size() const noexcept { return tensors_.size(); }
  ad::Tensor& operator[](std::size_t i) { return tensors_[i]; }
  const ad::Tensor& operator[](std::size_t i) const { return tensors_[i]; }
  const std::string& name(std::size_t i) const { return names_[i]; }
  std::optional<std::size_t> find(std::string_view name) const;

  std::vector<ad::Tensor>& tensors() noexcept { return tensors_; }
  const std::vector<ad::Tensor>& tensors() const noexcept { return tensors_; }
  const std::vector<std::string>& names() const noexcept { return names_; }

  std::size_t scalar_count() const noexcept;

  bool operator==(const ParamSet&) const = default;

 private:
  std::vector<std::string> names_;
  std::vector<ad::Tensor> tensors_;
};

// Parameters registered as borrowed leaves on one tape, indexed like the ParamSet.
class BoundParams {
 public:
  BoundParams(ad::Tape& tape, const ParamSet& params);
  ad::Var operator[](std::size_t i) const { return vars_[i]; }
  std::size_t size() const noexcept { return vars_.size(); }

 private:
  std::vector<ad::Var> vars_;
};

}  // namespace pmotion
