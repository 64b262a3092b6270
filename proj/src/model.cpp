#include "pmotion/model.hpp"

#include <cmath>
#include <string>

namespace pmotion {

using ad::Tensor;
using ad::Var;

std::string_view to_string(CellKind kind) noexcept { return kind == CellKind::Gru ? "gru" : "lstm"; }

std::string_view to_string(ModelKind kind) noexcept {
  switch (kind) {
    case ModelKind::TwoStream: return "two-stream";
    case ModelKind::Vq: return "vq";
    case ModelKind::Q: return "q";
  }
  return "?";
}

void ModelConfig::validate() const {
  if (joints == 0) throw DomainError("model needs at least one joint");
  if (hidden == 0) throw DomainError("hidden size must be >= 1");
  if (latent == 0) throw DomainError("latent size must be >= 1");
  // alpha == 1 (pure copy of the previous frame) is accepted here for oracle
  // models; trainable configurations are held to alpha < 1 by the config parser.
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw DomainError("alpha must satisfy 0 <= alpha <= 1");
}

// --- building blocks ----------------------------------------------------------

Var Dense::apply(const BoundParams& p, Var x) const { return matmul(p[weight], x) + p[bias]; }

Dense make_dense(ParamSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng) {
  const double bound = 1.0 / std::sqrt(static_cast<double>(in));
  Tensor w({out, in});
  for (double& v : w.data()) v = rng.uniform(-bound, bound);
  Dense d;
  d.in = in;
  d.out = out;
  d.weight = params.add(name + ".w", std::move(w));
  d.bias = params.add(name + ".b", Tensor({out}));
  return d;
}

RnnCell make_cell(ParamSet& params, const std::string& name, CellKind kind, std::size_t in, std::size_t hidden,
                  Rng& rng) {
  const std::size_t gates = kind == CellKind::Gru ? 3 : 4;
  auto uniform = [&](std::size_t rows, std::size_t cols) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(cols));
    Tensor t({rows, cols});
    for (double& v : t.data()) v = rng.uniform(-bound, bound);
    return t;
  };
  RnnCell c;
  c.kind = kind;
  c.in = in;
  c.hidden = hidden;
  c.w_x = params.add(name + ".wx", uniform(gates * hidden, in));
  if (kind == CellKind::Gru) {
    c.u_a = params.add(name + ".uzr", uniform(2 * hidden, hidden));
    c.u_b = params.add(name + ".uh", uniform(hidden, hidden));
  } else {
    c.u_a = params.add(name + ".u", uniform(4 * hidden, hidden));
  }
  c.bias = params.add(name + ".b", Tensor({gates * hidden}));
  return c;
}

CellState RnnCell::zero_state(ad::Tape& tape) const {
  CellState s;
  s.h = tape.zeros(hidden);
  if (kind == CellKind::Lstm) s.c = tape.zeros(hidden);
  return s;
}

CellState RnnCell::step(const BoundParams& p, Var x, const CellState& s) const {
  if (x.size() != in || s.h.size() != hidden) throw ShapeMismatch("rnn cell: input or state has wrong size");
  const std::size_t H = hidden;
  const Var gx = matmul(p[w_x], x) + p[bias];
  if (kind == CellKind::Gru) {
    const Var gh = matmul(p[u_a], s.h);
    const Var z = sigmoid(slice(gx, 0, H) + slice(gh, 0, H));
    const Var r = sigmoid(slice(gx, H, H) + slice(gh, H, H));
    const Var cand = tanh(slice(gx, 2 * H, H) + matmul(p[u_b], r * s.h));
    return {s.h + z * (cand - s.h), Var{}};
  }
  if (!s.c.valid() || s.c.size() != H) throw ShapeMismatch("lstm: missing cell memory");
  const Var g = gx + matmul(p[u_a], s.h);
  const Var i = sigmoid(slice(g, 0, H));
  const Var f = sigmoid(slice(g, H, H));
  const Var cand = tanh(slice(g, 2 * H, H));
  const Var o = sigmoid(slice(g, 3 * H, H));
  const Var c = f * s.c + i * cand;
  return {o * tanh(c), c};
}

Var sample_latent(const LatentVar& g, Rng& rng, bool deterministic) {
  if (deterministic) return g.mean;
  ad::Tape& tape = g.mean.tape();
  const Var eps = tape.constant(gaussian_sample(rng, {g.mean.size()}));
  return g.mean + exp(0.5 * g.logvar) * eps;
}

std::vector<double> sample_latent(const LatentGaussian& g, Rng& rng, bool deterministic) {
  if (g.mean.size() != g.logvar.size()) throw ShapeMismatch("latent mean and log-variance differ in size");
  std::vector<double> z(g.mean);
  if (deterministic) return z;
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += std::exp(0.5 * g.logvar[i]) * rng.normal();
  return z;
}

Var alpha_residual(Var previous, Var output, double alpha) {
  if (previous.size() != output.size()) throw ShapeMismatch("alpha residual: size mismatch");
  if (alpha == 0.0) return output;
  return alpha * previous + (1.0 - alpha) * output;
}

std::vector<double> alpha_residual(std::span<const double> previous, std::span<const double> output, double alpha) {
  if (previous.size() != output.size()) throw ShapeMismatch("alpha residual: size mismatch");
  std::vector<double> out(output.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = alpha * previous[i] + (1.0 - alpha) * output[i];
  return out;
}

LatentVar Stream::encode_posterior(const BoundParams& p, Var own, Var other, Var hidden) const {
  if (own.size() != own_dim || other.size() != other_dim) throw ShapeMismatch("encoder: input has wrong size");
  ad::Tape& tape = own.tape();
  const Var x = tape.concat({own, other, hidden});
  const Var e = swish(enc2.apply(p, swish(enc1.apply(p, x))));
  return {mean_head.apply(p, e), clamp(logvar_head.apply(p, e), kLogVarMin, kLogVarMax)};
}

// --- Model ----------------------------------------------------------------------

namespace {

Stream make_stream(ParamSet& params, const std::string& name, std::size_t own_offset, std::size_t own_dim,
                   std::size_t other_offset, std::size_t other_dim, const ModelConfig& c, Rng& rng) {
  const std::size_t H = c.hidden;
  const std::size_t L = c.latent;
  Stream s;
  s.own_offset = own_offset;
  s.own_dim = own_dim;
  s.other_offset = other_offset;
  s.other_dim = other_dim;
  s.enc1 = make_dense(params, name + ".enc1", own_dim + other_dim + H, H, rng);
  s.enc2 = make_dense(params, name + ".enc2", H, H, rng);
  s.mean_head = make_dense(params, name + ".mean", H, L, rng);
  s.logvar_head = make_dense(params, name + ".logvar", H, L, rng);
  s.rnn = make_cell(params, name + ".rnn", c.cell, own_dim + other_dim + L, H, rng);
  s.dec1 = make_dense(params, name + ".dec1", H, H, rng);
  s.dec2 = make_dense(params, name + ".dec2", H, H, rng);
  s.head = make_dense(params, name + ".head", H, own_dim, rng);
  return s;
}

}  // namespace

Model::Model(const ModelConfig& config, std::uint64_t init_seed) : config_(config) {
  config_.validate();
  Rng rng(init_seed);
  const std::size_t D = config_.frame_dim();
  const std::size_t P = D - kTranslationDim;
  if (config_.kind == ModelKind::TwoStream) {
    TwoStreamNet net;
    net.translation = make_stream(params_, "trans", 0, kTranslationDim, kTranslationDim, P, config_, rng);
    net.pose = make_stream(params_, "pose", kTranslationDim, P, 0, kTranslationDim, config_, rng);
    net_ = std::move(net);
  } else {
    // The stacked GRU is part of the baseline's definition, whatever the cell setting.
    const std::size_t H = config_.hidden;
    VqNet net;
    net.gru1 = make_cell(params_, "vq.gru1", CellKind::Gru, D, H, rng);
    net.gru2 = make_cell(params_, "vq.gru2", CellKind::Gru, H, H, rng);
    net.mean_head = make_dense(params_, "vq.mean", H, config_.latent, rng);
    net.logvar_head = make_dense(params_, "vq.logvar", H, config_.latent, rng);
    net.dec1 = make_dense(params_, "vq.dec1", config_.latent, H, rng);
    net.dec2 = make_dense(params_, "vq.dec2", H, D, rng);
    net_ = std::move(net);
  }
}

Model::Model(const ModelConfig& config, ParamSet params) : Model(config, 0) {
  if (params.size() != params_.size()) {
    throw ShapeMismatch("checkpoint has " + std::to_string(params.size()) + " tensors, model expects " +
                        std::to_string(params_.size()));
  }
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (params.name(i) != params_.name(i) || params[i].shape() != params_[i].shape()) {
      throw ShapeMismatch("checkpoint tensor '" + params.name(i) + "' does not match model layout ('" +
                          params_.name(i) + "')");
    }
    params_[i] = params[i];
    params_[i].set_requires_grad(true);
  }
}

ModelState Model::initial_state(ad::Tape& tape) const {
  ModelState s;
  if (const auto* net = two_stream()) {
    s.cells.push_back(net->translation.rnn.zero_state(tape));
    s.cells.push_back(net->pose.rnn.zero_state(tape));
  } else {
    const auto& vq = std::get<VqNet>(net_);
    s.cells.push_back(vq.gru1.zero_state(tape));
    s.cells.push_back(vq.gru2.zero_state(tape));
  }
  return s;
}

StepOutput Model::step(const BoundParams& p, Var prev_frame, const ModelState& state, Rng& rng,
                       bool deterministic) const {
  if (prev_frame.size() != config_.frame_dim()) {
    throw ShapeMismatch("step: frame has " + std::to_string(prev_frame.size()) + " values, expected " +
                        std::to_string(config_.frame_dim()));
  }
  if (state.cells.size() != 2) throw ShapeMismatch("step: model state must hold two cells");
  if (p.size() != params_.size()) throw ShapeMismatch("step: parameter binding does not match the model");
  if (const auto* net = two_stream()) return two_stream_step(*net, p, prev_frame, state, rng, deterministic);
  return vq_step(std::get<VqNet>(net_), p, prev_frame, state, rng, deterministic || config_.kind == ModelKind::Q);
}

StepOutput Model::two_stream_step(const TwoStreamNet& net, const BoundParams& p, Var prev, const ModelState& state,
                                  Rng& rng, bool deterministic) const {
  StepOutput out;
  std::vector<Var> parts;
  const Stream* streams[2] = {&net.translation, &net.pose};
  for (std::size_t k = 0; k < 2; ++k) {
    const Stream& s = *streams[k];
    const Var own = slice(prev, s.own_offset, s.own_dim);
    const Var other = slice(prev, s.other_offset, s.other_dim);
    const LatentVar post = s.encode_posterior(p, own, other, state.cells[k].h);
    const Var z = sample_latent(post, rng, deterministic);
    const CellState next = s.rnn.step(p, prev.tape().concat({own, other, z}), state.cells[k]);
    const Var raw = s.head.apply(p, swish(s.dec2.apply(p, swish(s.dec1.apply(p, next.h)))));
    parts.push_back(alpha_residual(own, raw, config_.alpha));
    out.state.cells.push_back(next);
    out.posteriors.push_back(post);
  }
  out.next_frame = prev.tape().concat(parts);
  return out;
}

StepOutput Model::vq_step(const VqNet& net, const BoundParams& p, Var prev, const ModelState& state, Rng& rng,
                          bool deterministic) const {
  StepOutput out;
  const CellState s1 = net.gru1.step(p, prev, state.cells[0]);
  const CellState s2 = net.gru2.step(p, s1.h, state.cells[1]);
  const LatentVar post{net.mean_head.apply(p, s2.h),
                       clamp(net.logvar_head.apply(p, s2.h), kLogVarMin, kLogVarMax)};
  const Var z = sample_latent(post, rng, deterministic);
  const Var raw = net.dec2.apply(p, swish(net.dec1.apply(p, z)));
  out.next_frame = alpha_residual(prev, raw, config_.alpha);
  out.state.cells = {s1, s2};
  out.posteriors.push_back(post);
  return out;
}

// --- Stepper ----------------------------------------------------------------------

Stepper::Stepper(const Model& model) : model_(model) { reset(); }

void Stepper::reset() {
  ad::Tape scratch;
  const ModelState s = model_.initial_state(scratch);
  hidden_.clear();
  cell_.clear();
  for (const auto& c : s.cells) {
    hidden_.emplace_back(c.h.size(), 0.0);
    cell_.emplace_back(c.c.valid() ? c.c.size() : 0, 0.0);
  }
}

Stepper::Result Stepper::step(std::span<const double> prev_frame, Rng& rng, bool deterministic) {
  tape_.clear();
  const BoundParams p(tape_, model_.params());
  ModelState state;
  for (std::size_t k = 0; k < hidden_.size(); ++k) {
    CellState c;
    c.h = tape_.constant(hidden_[k], hidden_[k].size());
    if (!cell_[k].empty()) c.c = tape_.constant(cell_[k], cell_[k].size());
    state.cells.push_back(c);
  }
  const Var prev = tape_.constant(prev_frame, prev_frame.size());
  const StepOutput out = model_.step(p, prev, state, rng, deterministic);

  Result r;
  const auto next = out.next_frame.value();
  r.next_frame.assign(next.begin(), next.end());
  for (const auto& post : out.posteriors) {
    const auto m = post.mean.value();
    const auto lv = post.logvar.value();
    r.posteriors.push_back({{m.begin(), m.end()}, {lv.begin(), lv.end()}});
  }
  for (std::size_t k = 0; k < hidden_.size(); ++k) {
    const auto h = out.state.cells[k].h.value();
    hidden_[k].assign(h.begin(), h.end());
    if (out.state.cells[k].c.valid()) {
      const auto c = out.state.cells[k].c.value();
      cell_[k].assign(c.begin(), c.end());
    }
  }
  return r;
}

}  // namespace pmotion
