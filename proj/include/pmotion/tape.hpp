#pragma once
// Reverse-mode differentiation over a linear tape of primitive operations.
//
// Nodes are appended in evaluation order, so the tape is topologically sorted
// by construction. Values are column vectors (rows x 1) or row-major matrices.
// A Var is a cheap handle (tape pointer + node index); a Tape must outlive
// every Var taken from it and is not movable.

#include <cstdint>
#include <initializer_list>
#include <span>
#include <string_view>
#include <vector>

#include "pmotion/tensor.hpp"

namespace pmotion::ad {

enum class Op : std::uint8_t {
  Leaf,
  MatMul,
  Add,
  Sub,
  Mul,
  Scale,
  AddScalar,
  Tanh,
  Sigmoid,
  Swish,
  Log,
  Exp,
  Sqrt,
  Abs,
  Square,
  Clamp,
  Concat,
  Slice,
  Sum,
  Mean,
};

std::string_view op_name(Op op) noexcept;

class Tape;

class Var {
 public:
  Var() = default;

  bool valid() const noexcept { return tape_ != nullptr; }
  Tape& tape() const noexcept { return *tape_; }
  std::uint32_t id() const noexcept { return id_; }

  std::size_t rows() const;
  std::size_t cols() const;
  std::size_t size() const;
  std::span<const double> value() const;
  // Value of a 1-element node.
  double item() const;
  Tensor tensor() const;

 private:
  friend class Tape;
  Var(Tape* tape, std::uint32_t id) : tape_(tape), id_(id) {}

  Tape* tape_ = nullptr;
  std::uint32_t id_ = 0;
};

class Gradients {
 public:
  // d(loss)/d(v); all zeros when v did not contribute to the loss.
  std::span<const double> of(Var v) const;
  Tensor tensor(Var v) const;

 private:
  friend class Tape;
  std::vector<std::vector<double>> grads_;
  std::vector<std::size_t> sizes_;
  mutable std::vector<double> zeros_;
};

class Tape {
 public:
  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  // Leaves. `constant` and `variable` copy; `parameter` borrows the tensor's
  // storage, which must stay alive and unchanged for the life of the tape.
  Var constant(const Tensor& t);
  Var constant(std::span<const double> values, std::size_t rows, std::size_t cols = 1);
  Var scalar(double value);
  Var zeros(std::size_t rows, std::size_t cols = 1);
  Var variable(const Tensor& t);
  Var parameter(const Tensor& t);

  Var matmul(Var a, Var b);
  Var add(Var a, Var b);
  Var sub(Var a, Var b);
  Var mul(Var a, Var b);
  Var scale(Var a, double factor);
  Var add_scalar(Var a, double offset);
  Var tanh(Var a);
  Var sigmoid(Var a);
  Var swish(Var a);
  Var log(Var a);
  Var exp(Var a);
  Var sqrt(Var a);
  Var abs(Var a);
  Var square(Var a);
  // Gradient passes only where lo <= a <= hi.
  Var clamp(Var a, double lo, double hi);
  // Vertical stack of column vectors.
  Var concat(std::span<const Var> parts);
  Var concat(std::initializer_list<Var> parts) { return concat(std::span<const Var>(parts.begin(), parts.size())); }
  Var slice(Var a, std::size_t offset, std::size_t length);
  Var sum(Var a);
  Var mean(Var a);

  // Throws NumericFault if any gradient reaching a requires-grad leaf is non-finite.
  Gradients backward(Var loss) const;

  std::size_t size() const noexcept { return nodes_.size(); }
  Op op(Var v) const { return nodes_.at(v.id()).op; }
  std::vector<Op> record() const;
  void clear() noexcept { nodes_.clear(); }

  std::span<const double> value(std::uint32_t id) const;
  std::size_t rows(std::uint32_t id) const { return nodes_[id].rows; }
  std::size_t cols(std::uint32_t id) const { return nodes_[id].cols; }

 private:
  struct Node {
    Op op = Op::Leaf;
    bool needs_grad = false;
    std::uint32_t a = 0;
    std::uint32_t b = 0;
    std::size_t rows = 0;
    std::size_t cols = 1;
    double p0 = 0.0;
    double p1 = 0.0;
    std::size_t offset = 0;
    std::vector<std::uint32_t> parts;
    std::vector<double> owned;
    const double* borrowed = nullptr;

    std::size_t size() const noexcept { return rows * cols; }
  };

  Var push(Node node);
  Var unary(Op op, Var a, double p0 = 0.0, double p1 = 0.0);
  void check_same_tape(Var v) const;
  const Node& node(Var v) const;

  std::vector<Node> nodes_;
};

inline Var operator+(Var a, Var b) { return a.tape().add(a, b); }
inline Var operator-(Var a, Var b) { return a.tape().sub(a, b); }
inline Var operator*(Var a, Var b) { return a.tape().mul(a, b); }
inline Var operator*(double s, Var a) { return a.tape().scale(a, s); }
inline Var operator*(Var a, double s) { return a.tape().scale(a, s); }
inline Var operator+(Var a, double s) { return a.tape().add_scalar(a, s); }
inline Var operator-(Var a, double s) { return a.tape().add_scalar(a, -s); }
inline Var operator-(Var a) { return a.tape().scale(a, -1.0); }

inline Var matmul(Var a, Var b) { return a.tape().matmul(a, b); }
inline Var tanh(Var a) { return a.tape().tanh(a); }
inline Var sigmoid(Var a) { return a.tape().sigmoid(a); }
inline Var swish(Var a) { return a.tape().swish(a); }
inline Var log(Var a) { return a.tape().log(a); }
inline Var exp(Var a) { return a.tape().exp(a); }
inline Var sqrt(Var a) { return a.tape().sqrt(a); }
inline Var abs(Var a) { return a.tape().abs(a); }
inline Var square(Var a) { return a.tape().square(a); }
inline Var clamp(Var a, double lo, double hi) { return a.tape().clamp(a, lo, hi); }
inline Var slice(Var a, std::size_t offset, std::size_t length) { return a.tape().slice(a, offset, length); }
inline Var sum(Var a) { return a.tape().sum(a); }
inline Var mean(Var a) { return a.tape().mean(a); }

}  // namespace pmotion::ad
