#include "pmotion/tape.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pmotion/kernels.hpp"

namespace pmotion::ad {
namespace {

double logistic(double x) {
  // Split on sign so exp never overflows.
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void require_finite(std::span<const double> values, Op op) {
  for (double v : values) {
    if (!std::isfinite(v)) throw NumericFault("non-finite value produced by " + std::string(op_name(op)));
  }
}

}  // namespace

std::string_view op_name(Op op) noexcept {
  switch (op) {
    case Op::Leaf: return "leaf";
    case Op::MatMul: return "matmul";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Mul: return "mul";
    case Op::Scale: return "scale";
    case Op::AddScalar: return "add_scalar";
    case Op::Tanh: return "tanh";
    case Op::Sigmoid: return "sigmoid";
    case Op::Swish: return "swish";
    case Op::Log: return "log";
    case Op::Exp: return "exp";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Square: return "square";
    case Op::Clamp: return "clamp";
    case Op::Concat: return "concat";
    case Op::Slice: return "slice";
    case Op::Sum: return "sum";
    case Op::Mean: return "mean";
  }
  return "?";
}

// --- Var --------------------------------------------------------------------

std::size_t Var::rows() const { return tape_->rows(id_); }
std::size_t Var::cols() const { return tape_->cols(id_); }
std::size_t Var::size() const { return rows() * cols(); }
std::span<const double> Var::value() const { return tape_->value(id_); }

double Var::item() const {
  const auto v = value();
  if (v.size() != 1) throw ShapeMismatch("item() on a node with " + std::to_string(v.size()) + " elements");
  return v[0];
}

Tensor Var::tensor() const {
  const auto v = value();
  std::vector<std::size_t> shape = cols() == 1 ? std::vector<std::size_t>{rows()}
                                               : std::vector<std::size_t>{rows(), cols()};
  return Tensor(std::move(shape), std::vector<double>(v.begin(), v.end()));
}

// --- Gradients --------------------------------------------------------------

std::span<const double> Gradients::of(Var v) const {
  const std::uint32_t id = v.id();
  if (id < grads_.size() && !grads_[id].empty()) return grads_[id];
  const std::size_t n = id < sizes_.size() ? sizes_[id] : v.size();
  if (zeros_.size() < n) zeros_.assign(n, 0.0);
  return std::span<const double>(zeros_.data(), n);
}

Tensor Gradients::tensor(Var v) const {
  const auto g = of(v);
  std::vector<std::size_t> shape = v.cols() == 1 ? std::vector<std::size_t>{v.rows()}
                                                 : std::vector<std::size_t>{v.rows(), v.cols()};
  return Tensor(std::move(shape), std::vector<double>(g.begin(), g.end()));
}

// --- Tape: leaves -----------------------------------------------------------

std::span<const double> Tape::value(std::uint32_t id) const {
  const Node& n = nodes_[id];
  if (n.borrowed != nullptr) return std::span<const double>(n.borrowed, n.size());
  return n.owned;
}

const Tape::Node& Tape::node(Var v) const {
  check_same_tape(v);
  return nodes_[v.id()];
}

void Tape::check_same_tape(Var v) const {
  if (!v.valid() || &v.tape() != this || v.id() >= nodes_.size()) {
    throw ShapeMismatch("variable does not belong to this tape");
  }
}

Var Tape::push(Node node) {
  const auto id = static_cast<std::uint32_t>(nodes_.size());
  nodes_.push_back(std::move(node));
  return Var(this, id);
}

Var Tape::constant(std::span<const double> values, std::size_t rows, std::size_t cols) {
  if (values.size() != rows * cols) throw ShapeMismatch("constant: value count does not match rows x cols");
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.owned.assign(values.begin(), values.end());
  return push(std::move(n));
}

Var Tape::constant(const Tensor& t) { return constant(t.data(), t.rows(), t.cols()); }

Var Tape::scalar(double value) { return constant(std::span<const double>(&value, 1), 1, 1); }

Var Tape::zeros(std::size_t rows, std::size_t cols) {
  Node n;
  n.rows = rows;
  n.cols = cols;
  n.owned.assign(rows * cols, 0.0);
  return push(std::move(n));
}

Var Tape::variable(const Tensor& t) {
  Var v = constant(t);
  nodes_[v.id()].needs_grad = true;
  return v;
}

Var Tape::parameter(const Tensor& t) {
  Node n;
  n.rows = t.rows();
  n.cols = t.cols();
  n.borrowed = t.data().data();
  n.needs_grad = true;
  return push(std::move(n));
}

std::vector<Op> Tape::record() const {
  std::vector<Op> ops;
  ops.reserve(nodes_.size());
  for (const Node& n : nodes_) ops.push_back(n.op);
  return ops;
}

// --- Tape: forward ops ------------------------------------------------------

Var Tape::matmul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.cols != nb.rows) {
    throw ShapeMismatch("matmul: " + std::to_string(na.rows) + "x" + std::to_string(na.cols) + " times " +
                        std::to_string(nb.rows) + "x" + std::to_string(nb.cols));
  }
  Node n;
  n.op = Op::MatMul;
  n.a = a.id();
  n.b = b.id();
  n.rows = na.rows;
  n.cols = nb.cols;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  n.owned.assign(n.size(), 0.0);
  const auto& k = kernels::active();
  const auto A = value(a.id());
  const auto B = value(b.id());
  const std::size_t m = na.rows, inner = na.cols, cols = nb.cols;
  if (cols == 1) {
    k.gemv(A.data(), m, inner, B.data(), n.owned.data());
  } else {
    for (std::size_t i = 0; i < m; ++i) {
      for (std::size_t p = 0; p < inner; ++p) {
        k.axpy(A[i * inner + p], B.data() + p * cols, n.owned.data() + i * cols, cols);
      }
    }
  }
  require_finite(n.owned, Op::MatMul);
  return push(std::move(n));
}

Var Tape::add(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols) throw ShapeMismatch("add: shape mismatch");
  Node n;
  n.op = Op::Add;
  n.a = a.id();
  n.b = b.id();
  n.rows = na.rows;
  n.cols = na.cols;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  const auto x = value(a.id());
  const auto y = value(b.id());
  n.owned.resize(n.size());
  for (std::size_t i = 0; i < n.owned.size(); ++i) n.owned[i] = x[i] + y[i];
  require_finite(n.owned, Op::Add);
  return push(std::move(n));
}

Var Tape::sub(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols) throw ShapeMismatch("sub: shape mismatch");
  Node n;
  n.op = Op::Sub;
  n.a = a.id();
  n.b = b.id();
  n.rows = na.rows;
  n.cols = na.cols;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  const auto x = value(a.id());
  const auto y = value(b.id());
  n.owned.resize(n.size());
  for (std::size_t i = 0; i < n.owned.size(); ++i) n.owned[i] = x[i] - y[i];
  require_finite(n.owned, Op::Sub);
  return push(std::move(n));
}

Var Tape::mul(Var a, Var b) {
  const Node& na = node(a);
  const Node& nb = node(b);
  if (na.rows != nb.rows || na.cols != nb.cols) throw ShapeMismatch("mul: shape mismatch");
  Node n;
  n.op = Op::Mul;
  n.a = a.id();
  n.b = b.id();
  n.rows = na.rows;
  n.cols = na.cols;
  n.needs_grad = na.needs_grad || nb.needs_grad;
  const auto x = value(a.id());
  const auto y = value(b.id());
  n.owned.resize(n.size());
  for (std::size_t i = 0; i < n.owned.size(); ++i) n.owned[i] = x[i] * y[i];
  require_finite(n.owned, Op::Mul);
  return push(std::move(n));
}

Var Tape::unary(Op op, Var a, double p0, double p1) {
  const Node& na = node(a);
  Node n;
  n.op = op;
  n.a = a.id();
  n.rows = na.rows;
  n.cols = na.cols;
  n.p0 = p0;
  n.p1 = p1;
  n.needs_grad = na.needs_grad;
  const auto x = value(a.id());
  n.owned.resize(n.size());
  auto& y = n.owned;
  switch (op) {
    case Op::Scale:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = p0 * x[i];
      break;
    case Op::AddScalar:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] + p0;
      break;
    case Op::Tanh:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::tanh(x[i]);
      break;
    case Op::Sigmoid:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = logistic(x[i]);
      break;
    case Op::Swish:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * logistic(x[i]);
      break;
    case Op::Log:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::log(x[i]);
      break;
    case Op::Exp:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::exp(x[i]);
      break;
    case Op::Sqrt:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::sqrt(x[i]);
      break;
    case Op::Abs:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::fabs(x[i]);
      break;
    case Op::Square:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = x[i] * x[i];
      break;
    case Op::Clamp:
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = std::clamp(x[i], p0, p1);
      break;
    default:
      throw ShapeMismatch("unary: unsupported op");
  }
  require_finite(y, op);
  return push(std::move(n));
}

Var Tape::scale(Var a, double factor) { return unary(Op::Scale, a, factor); }
Var Tape::add_scalar(Var a, double offset) { return unary(Op::AddScalar, a, offset); }
Var Tape::tanh(Var a) { return unary(Op::Tanh, a); }
Var Tape::sigmoid(Var a) { return unary(Op::Sigmoid, a); }
Var Tape::swish(Var a) { return unary(Op::Swish, a); }
Var Tape::log(Var a) { return unary(Op::Log, a); }
Var Tape::exp(Var a) { return unary(Op::Exp, a); }
Var Tape::sqrt(Var a) { return unary(Op::Sqrt, a); }
Var Tape::abs(Var a) { return unary(Op::Abs, a); }
Var Tape::square(Var a) { return unary(Op::Square, a); }

Var Tape::clamp(Var a, double lo, double hi) {
  if (lo > hi) throw DomainError("clamp: lo > hi");
  return unary(Op::Clamp, a, lo, hi);
}

Var Tape::concat(std::span<const Var> parts) {
  if (parts.empty()) throw ShapeMismatch("concat: no inputs");
  Node n;
  n.op = Op::Concat;
  n.cols = 1;
  for (const Var& p : parts) {
    const Node& np = node(p);
    if (np.cols != 1) throw ShapeMismatch("concat: inputs must be column vectors");
    n.rows += np.rows;
    n.needs_grad = n.needs_grad || np.needs_grad;
    n.parts.push_back(p.id());
  }
  n.owned.reserve(n.rows);
  for (const Var& p : parts) {
    const auto v = value(p.id());
    n.owned.insert(n.owned.end(), v.begin(), v.end());
  }
  return push(std::move(n));
}

Var Tape::slice(Var a, std::size_t offset, std::size_t length) {
  const Node& na = node(a);
  if (na.cols != 1 || offset + length > na.rows || length == 0) throw ShapeMismatch("slice: out of range");
  Node n;
  n.op = Op::Slice;
  n.a = a.id();
  n.rows = length;
  n.offset = offset;
  n.needs_grad = na.needs_grad;
  const auto x = value(a.id());
  n.owned.assign(x.begin() + static_cast<std::ptrdiff_t>(offset),
                 x.begin() + static_cast<std::ptrdiff_t>(offset + length));
  return push(std::move(n));
}

Var Tape::sum(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Sum;
  n.a = a.id();
  n.rows = 1;
  n.needs_grad = na.needs_grad;
  double s = 0.0;
  for (double x : value(a.id())) s += x;
  n.owned = {s};
  require_finite(n.owned, Op::Sum);
  return push(std::move(n));
}

Var Tape::mean(Var a) {
  const Node& na = node(a);
  Node n;
  n.op = Op::Mean;
  n.a = a.id();
  n.rows = 1;
  n.needs_grad = na.needs_grad;
  double s = 0.0;
  for (double x : value(a.id())) s += x;
  n.owned = {s / static_cast<double>(na.size())};
  require_finite(n.owned, Op::Mean);
  return push(std::move(n));
}

// --- Tape: backward ---------------------------------------------------------

Gradients Tape::backward(Var loss) const {
  check_same_tape(loss);
  if (nodes_[loss.id()].size() != 1) throw ShapeMismatch("backward: loss must be a scalar");

  Gradients out;
  auto& g = out.grads_;
  g.resize(nodes_.size());
  out.sizes_.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) out.sizes_[i] = nodes_[i].size();
  if (!nodes_[loss.id()].needs_grad) return out;

  auto grad_of = [&](std::uint32_t id) -> std::vector<double>* {
    if (!nodes_[id].needs_grad) return nullptr;
    if (g[id].empty()) g[id].assign(nodes_[id].size(), 0.0);
    return &g[id];
  };

  const auto& k = kernels::active();
  g[loss.id()] = {1.0};
  for (std::uint32_t id = loss.id() + 1; id-- > 0;) {
    const Node& n = nodes_[id];
    if (n.op == Op::Leaf || g[id].empty()) continue;
    const std::vector<double>& dy = g[id];
    const auto y = value(id);

    switch (n.op) {
      case Op::MatMul: {
        const Node& na = nodes_[n.a];
        const std::size_t m = na.rows, inner = na.cols, cols = n.cols;
        const auto A = value(n.a);
        const auto B = value(n.b);
        if (auto* da = grad_of(n.a)) {
          if (cols == 1) {
            k.ger_acc(da->data(), m, inner, dy.data(), B.data());
          } else {
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t p = 0; p < inner; ++p)
                (*da)[i * inner + p] += k.dot(dy.data() + i * cols, B.data() + p * cols, cols);
          }
        }
        if (auto* db = grad_of(n.b)) {
          if (cols == 1) {
            k.gemv_t_acc(A.data(), m, inner, dy.data(), db->data());
          } else {
            for (std::size_t i = 0; i < m; ++i)
              for (std::size_t p = 0; p < inner; ++p)
                k.axpy(A[i * inner + p], dy.data() + i * cols, db->data() + p * cols, cols);
          }
        }
        break;
      }
      case Op::Add:
        if (auto* da = grad_of(n.a)) k.axpy(1.0, dy.data(), da->data(), dy.size());
        if (auto* db = grad_of(n.b)) k.axpy(1.0, dy.data(), db->data(), dy.size());
        break;
      case Op::Sub:
        if (auto* da = grad_of(n.a)) k.axpy(1.0, dy.data(), da->data(), dy.size());
        if (auto* db = grad_of(n.b)) k.axpy(-1.0, dy.data(), db->data(), dy.size());
        break;
      case Op::Mul:
        if (auto* da = grad_of(n.a)) k.hadamard_acc(dy.data(), value(n.b).data(), da->data(), dy.size());
        if (auto* db = grad_of(n.b)) k.hadamard_acc(dy.data(), value(n.a).data(), db->data(), dy.size());
        break;
      case Op::Scale:
        if (auto* da = grad_of(n.a)) k.axpy(n.p0, dy.data(), da->data(), dy.size());
        break;
      case Op::AddScalar:
        if (auto* da = grad_of(n.a)) k.axpy(1.0, dy.data(), da->data(), dy.size());
        break;
      case Op::Tanh:
        if (auto* da = grad_of(n.a))
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] * (1.0 - y[i] * y[i]);
        break;
      case Op::Sigmoid:
        if (auto* da = grad_of(n.a))
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] * y[i] * (1.0 - y[i]);
        break;
      case Op::Swish:
        if (auto* da = grad_of(n.a)) {
          const auto x = value(n.a);
          for (std::size_t i = 0; i < dy.size(); ++i) {
            const double s = logistic(x[i]);
            (*da)[i] += dy[i] * (s + x[i] * s * (1.0 - s));
          }
        }
        break;
      case Op::Log:
        if (auto* da = grad_of(n.a)) {
          const auto x = value(n.a);
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] / x[i];
        }
        break;
      case Op::Exp:
        if (auto* da = grad_of(n.a)) k.hadamard_acc(dy.data(), y.data(), da->data(), dy.size());
        break;
      case Op::Sqrt:
        if (auto* da = grad_of(n.a))
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += dy[i] * 0.5 / y[i];
        break;
      case Op::Abs:
        if (auto* da = grad_of(n.a)) {
          const auto x = value(n.a);
          for (std::size_t i = 0; i < dy.size(); ++i) {
            const double s = x[i] > 0.0 ? 1.0 : (x[i] < 0.0 ? -1.0 : 0.0);
            (*da)[i] += dy[i] * s;
          }
        }
        break;
      case Op::Square:
        if (auto* da = grad_of(n.a)) {
          const auto x = value(n.a);
          for (std::size_t i = 0; i < dy.size(); ++i) (*da)[i] += 2.0 * dy[i] * x[i];
        }
        break;
      case Op::Clamp:
        if (auto* da = grad_of(n.a)) {
          const auto x = value(n.a);
          for (std::size_t i = 0; i < dy.size(); ++i)
            if (x[i] >= n.p0 && x[i] <= n.p1) (*da)[i] += dy[i];
        }
        break;
      case Op::Concat: {
        std::size_t off = 0;
        for (std::uint32_t part : n.parts) {
          const std::size_t len = nodes_[part].size();
          if (auto* dp = grad_of(part)) k.axpy(1.0, dy.data() + off, dp->data(), len);
          off += len;
        }
        break;
      }
      case Op::Slice:
        if (auto* da = grad_of(n.a)) k.axpy(1.0, dy.data(), da->data() + n.offset, dy.size());
        break;
      case Op::Sum:
        if (auto* da = grad_of(n.a))
          for (double& v : *da) v += dy[0];
        break;
      case Op::Mean:
        if (auto* da = grad_of(n.a)) {
          const double share = dy[0] / static_cast<double>(da->size());
          for (double& v : *da) v += share;
        }
        break;
      case Op::Leaf:
        break;
    }
  }

  for (std::size_t id = 0; id < nodes_.size(); ++id) {
    if (nodes_[id].op != Op::Leaf || g[id].empty()) continue;
    for (double v : g[id]) {
      if (!std::isfinite(v)) throw NumericFault("non-finite gradient at leaf " + std::to_string(id));
    }
  }
  return out;
}

}  // namespace pmotion::ad
