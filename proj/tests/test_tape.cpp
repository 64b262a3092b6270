#include <gtest/gtest.h>

#include <cmath>
#include <functional>

#include "pmotion/random.hpp"
#include "pmotion/tape.hpp"

using namespace pmotion;
using namespace pmotion::ad;

namespace {

using Builder = std::function<Var(Tape&, Var)>;

// Central differences on every input element of a scalar-valued expression.
void check_gradient(const Builder& f, Tensor x, double tol = 1e-7) {
  x.set_requires_grad(true);
  Tape tape;
  const Var v = tape.parameter(x);
  const Var loss = f(tape, v);
  const auto g = tape.backward(loss);
  const auto analytic = g.of(v);

  const double h = 1e-6;
  for (std::size_t i = 0; i < x.size(); ++i) {
    Tensor xp = x, xm = x;
    xp[i] += h;
    xm[i] -= h;
    Tape tp, tm;
    const double fp = f(tp, tp.constant(xp)).item();
    const double fm = f(tm, tm.constant(xm)).item();
    const double numeric = (fp - fm) / (2 * h);
    EXPECT_NEAR(analytic[i], numeric, tol * std::max(1.0, std::abs(numeric))) << "element " << i;
  }
}

Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed, double lo = -1.5, double hi = 1.5) {
  Rng rng(seed);
  Tensor t(std::move(shape));
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(lo, hi);
  return t;
}

// Weighted sum so each element gets a different upstream gradient.
Var weigh(Tape& tape, Var v) {
  std::vector<double> w(v.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = 0.3 + 0.17 * static_cast<double>(i);
  return sum(tape.constant(w, v.rows(), v.cols()) * v);
}

TEST(TapeGradient, Elementwise) {
  const auto x = random_tensor({7}, 1);
  check_gradient([](Tape& t, Var v) { return weigh(t, tanh(v)); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, sigmoid(v)); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, swish(v)); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, exp(v)); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, square(v)); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, abs(v)); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, 2.5 * v - 1.0); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, v * v + v); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, v - tanh(v)); }, x);
}

TEST(TapeGradient, PositiveDomain) {
  const auto x = random_tensor({6}, 2, 0.2, 3.0);
  check_gradient([](Tape& t, Var v) { return weigh(t, log(v)); }, x);
  check_gradient([](Tape& t, Var v) { return weigh(t, sqrt(v)); }, x);
}

TEST(TapeGradient, ClampPassesInsideOnly) {
  Tensor x = Tensor::vector({-3.0, -0.5, 0.25, 0.9, 4.0});
  check_gradient([](Tape& t, Var v) { return weigh(t, clamp(v, -1.0, 1.0)); }, x);
  Tape tape;
  x.set_requires_grad(true);
  const Var v = tape.parameter(x);
  const auto g = tape.backward(sum(clamp(v, -1.0, 1.0)));
  EXPECT_EQ(g.of(v)[0], 0.0);
  EXPECT_EQ(g.of(v)[2], 1.0);
  EXPECT_EQ(g.of(v)[4], 0.0);
}

TEST(TapeGradient, MatMulBothOperands) {
  const auto A = random_tensor({4, 5}, 3);
  const auto x = random_tensor({5}, 4);
  const auto B = random_tensor({5, 3}, 5);
  check_gradient([&](Tape& t, Var a) { return weigh(t, matmul(a, t.constant(x))); }, A);
  check_gradient([&](Tape& t, Var v) { return weigh(t, matmul(t.constant(A), v)); }, x);
  // Matrix-matrix.
  check_gradient([&](Tape& t, Var a) { return weigh(t, matmul(a, t.constant(B))); }, A);
  check_gradient([&](Tape& t, Var b) { return weigh(t, matmul(t.constant(A), b)); }, B);
}

TEST(TapeGradient, ConcatSliceReductions) {
  const auto x = random_tensor({6}, 6);
  check_gradient(
      [](Tape& t, Var v) {
        const Var a = slice(v, 0, 2);
        const Var b = slice(v, 2, 4);
        return weigh(t, t.concat({tanh(b), a, b}));
      },
      x);
  check_gradient([](Tape&, Var v) { return mean(square(v)); }, x);
  check_gradient([](Tape&, Var v) { return sum(v) * sum(v); }, x);
}

TEST(TapeGradient, ReusedNodeAccumulates) {
  Tensor x = Tensor::scalar(1.5);
  x.set_requires_grad(true);
  Tape tape;
  const Var v = tape.parameter(x);
  const Var y = v * v * v;  // 3 x^2 = 6.75
  EXPECT_DOUBLE_EQ(tape.backward(y).of(v)[0], 6.75);
}

TEST(TapeValue, HandComputed) {
  Tape tape;
  const Var a = tape.constant(std::vector<double>{1, 2, 3, 4, 5, 6}, 2, 3);
  const Var x = tape.constant(std::vector<double>{1, 0, -1}, 3);
  const Var y = matmul(a, x);
  ASSERT_EQ(y.rows(), 2u);
  EXPECT_EQ(y.value()[0], -2.0);
  EXPECT_EQ(y.value()[1], -2.0);
  EXPECT_DOUBLE_EQ(mean(x).item(), 0.0);
  EXPECT_DOUBLE_EQ(swish(tape.scalar(0.0)).item(), 0.0);
  EXPECT_DOUBLE_EQ(sigmoid(tape.scalar(0.0)).item(), 0.5);
}

TEST(TapeValue, SigmoidIsStableForLargeInputs) {
  Tape tape;
  EXPECT_EQ(sigmoid(tape.scalar(-800.0)).item(), 0.0);
  EXPECT_EQ(sigmoid(tape.scalar(800.0)).item(), 1.0);
}

TEST(Tape, NonParticipatingGradientIsZero) {
  Tensor a = Tensor::vector({1, 2}), b = Tensor::vector({3, 4});
  a.set_requires_grad(true);
  b.set_requires_grad(true);
  Tape tape;
  const Var va = tape.parameter(a);
  const Var vb = tape.parameter(b);
  const auto g = tape.backward(sum(va));
  ASSERT_EQ(g.of(vb).size(), 2u);
  EXPECT_EQ(g.of(vb)[0], 0.0);
  EXPECT_EQ(g.of(vb)[1], 0.0);
}

TEST(Tape, ParameterBorrowsStorage) {
  Tensor w = Tensor::vector({1.0, 2.0});
  w.set_requires_grad(true);
  Tape tape;
  const Var v = tape.parameter(w);
  EXPECT_EQ(v.value().data(), w.data().data());
}

TEST(Tape, RecordsOpsInOrder) {
  Tape tape;
  const Var x = tape.scalar(1.0);
  const Var y = tanh(x) + x;
  (void)y;
  const std::vector<Op> expected{Op::Leaf, Op::Tanh, Op::Add};
  EXPECT_EQ(tape.record(), expected);
  tape.clear();
  EXPECT_EQ(tape.size(), 0u);
}

TEST(TapeErrors, ShapeMismatch) {
  Tape tape;
  const Var a = tape.zeros(3);
  const Var b = tape.zeros(4);
  EXPECT_THROW(a + b, ShapeMismatch);
  EXPECT_THROW(matmul(tape.zeros(2, 3), b), ShapeMismatch);
  EXPECT_THROW(slice(a, 2, 2), ShapeMismatch);
  EXPECT_THROW(tape.backward(a), ShapeMismatch);
  EXPECT_THROW(a.item(), ShapeMismatch);
  EXPECT_THROW(tape.constant(std::vector<double>{1, 2, 3}, 2), ShapeMismatch);
}

TEST(TapeErrors, CrossTapeUseIsRejected) {
  Tape t1, t2;
  const Var a = t1.zeros(2);
  const Var b = t2.zeros(2);
  EXPECT_THROW(t1.add(a, b), ShapeMismatch);
}

TEST(TapeErrors, NonFiniteValueIsNumericFault) {
  Tape tape;
  EXPECT_THROW(log(tape.scalar(0.0)), NumericFault);
  EXPECT_THROW(exp(tape.scalar(1000.0)), NumericFault);
}

TEST(TapeErrors, NonFiniteGradientIsNumericFault) {
  // sqrt'(0) is infinite.
  Tensor x = Tensor::scalar(0.0);
  x.set_requires_grad(true);
  Tape tape;
  const Var v = tape.parameter(x);
  EXPECT_THROW(tape.backward(sqrt(v)), NumericFault);
}

}  // namespace

namespace {

TEST(TapeGradient, ClosedForms) {
  Tensor x = Tensor::scalar(3.0);
  x.set_requires_grad(true);
  Tape tape;
  const Var v = tape.parameter(x);
  EXPECT_DOUBLE_EQ(tape.backward(square(v)).of(v)[0], 6.0);
  EXPECT_DOUBLE_EQ(tape.backward(v * v).of(v)[0], 6.0);

  Tensor zero = Tensor::scalar(0.0);
  zero.set_requires_grad(true);
  const Var z = tape.parameter(zero);
  EXPECT_DOUBLE_EQ(tape.backward(tanh(z)).of(z)[0], 1.0);
}

// Relative error of the analytic gradient against central differences for a
// random 3-layer tanh/swish/sigmoid network, w.r.t. all weights.
TEST(TapeGradient, ThreeLayerComposition) {
  const auto W1 = random_tensor({6, 4}, 11);
  const auto W2 = random_tensor({5, 6}, 12);
  const auto W3 = random_tensor({1, 5}, 13);
  const auto x = random_tensor({4}, 14);
  auto forward = [&](Tape& t, Var w1, Var w2, Var w3) {
    const Var h1 = tanh(matmul(w1, t.constant(x)));
    const Var h2 = swish(matmul(w2, h1));
    return sum(sigmoid(matmul(w3, h2)));
  };
  double worst = 0.0;
  for (int which = 0; which < 3; ++which) {
    const Tensor& target = which == 0 ? W1 : which == 1 ? W2 : W3;
    Builder f = [&, which](Tape& t, Var v) {
      const Var w1 = which == 0 ? v : t.constant(W1);
      const Var w2 = which == 1 ? v : t.constant(W2);
      const Var w3 = which == 2 ? v : t.constant(W3);
      return forward(t, w1, w2, w3);
    };
    Tensor p = target;
    p.set_requires_grad(true);
    Tape tape;
    const Var v = tape.parameter(p);
    const auto g = tape.backward(f(tape, v));
    for (std::size_t i = 0; i < p.size(); ++i) {
      Tensor xp = target, xm = target;
      xp[i] += 1e-6;
      xm[i] -= 1e-6;
      Tape tp, tm;
      const double numeric = (f(tp, tp.constant(xp)).item() - f(tm, tm.constant(xm)).item()) / 2e-6;
      const double denom = std::max(std::abs(numeric), 1e-3);
      worst = std::max(worst, std::abs(g.of(v)[i] - numeric) / denom);
    }
  }
  EXPECT_LE(worst, 1e-6);
}

// Ten random points per primitive, relative tolerance 1e-6.
TEST(TapeGradient, PrimitivesAtRandomPoints) {
  const std::vector<std::pair<const char*, Builder>> unary = {
      {"tanh", [](Tape& t, Var v) { return weigh(t, tanh(v)); }},
      {"sigmoid", [](Tape& t, Var v) { return weigh(t, sigmoid(v)); }},
      {"swish", [](Tape& t, Var v) { return weigh(t, swish(v)); }},
      {"exp", [](Tape& t, Var v) { return weigh(t, exp(v)); }},
      {"square", [](Tape& t, Var v) { return weigh(t, square(v)); }},
      {"mul", [](Tape& t, Var v) { return weigh(t, v * tanh(v)); }},
      {"add", [](Tape& t, Var v) { return weigh(t, v + sigmoid(v)); }},
      {"mean", [](Tape&, Var v) { return mean(square(v)); }},
  };
  for (const auto& [name, f] : unary) {
    SCOPED_TRACE(name);
    check_gradient(f, random_tensor({10}, 100 + std::string_view(name).size()), 1e-6);
  }
  const std::vector<std::pair<const char*, Builder>> positive = {
      {"log", [](Tape& t, Var v) { return weigh(t, log(v)); }},
      {"sqrt", [](Tape& t, Var v) { return weigh(t, sqrt(v)); }},
  };
  for (const auto& [name, f] : positive) {
    SCOPED_TRACE(name);
    check_gradient(f, random_tensor({10}, 200, 0.1, 4.0), 1e-6);
  }
}

TEST(TapeValue, SwishAsymptote) {
  Tape tape;
  EXPECT_EQ(swish(tape.scalar(0.0)).item(), 0.0);
  EXPECT_NEAR(swish(tape.scalar(50.0)).item() / 50.0, 1.0, 1e-12);
}

TEST(TapeValue, DeterministicForward) {
  const auto x = random_tensor({9}, 300);
  auto run = [&] {
    Tape t;
    return weigh(t, swish(tanh(t.constant(x)) * 3.0)).item();
  };
  EXPECT_EQ(run(), run());
}

}  // namespace
