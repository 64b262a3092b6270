#pragma once
// Recurrent motion models.
//
// Two-stream model: a translation stream and a pose stream, each with
//   encoder   [own ++ other ++ hidden] -> 2 x (dense + swish) -> mean / log-variance heads
//   sampler   z = mean + exp(logvar / 2) * eps
//   rnn       cell([own ++ other ++ z], hidden)
//   decoder   2 x (dense + swish) -> linear head -> raw output
//   residual  next_part = alpha * own + (1 - alpha) * raw
// Each stream sees the other's part of the previous frame.
//
// VQ baseline: two stacked GRUs on the full frame, posterior heads on the top
// hidden state, z -> dense(L->H) + swish -> dense(H->D), then the residual.
// The Q baseline is the VQ network with z = mean.

#include <cstddef>
#include <cstdint>
#include <span>
#include <string_view>
#include <variant>
#include <vector>

#include "pmotion/motion.hpp"
#include "pmotion/params.hpp"
#include "pmotion/random.hpp"
#include "pmotion/tape.hpp"

namespace pmotion {

enum class CellKind { Gru, Lstm };
enum class ModelKind { TwoStream, Vq, Q };

std::string_view to_string(CellKind kind) noexcept;
std::string_view to_string(ModelKind kind) noexcept;

inline constexpr double kLogVarMin = -10.0;
inline constexpr double kLogVarMax = 10.0;

struct ModelConfig {
  ModelKind kind = ModelKind::TwoStream;
  CellKind cell = CellKind::Gru;
  std::size_t joints = kDefaultJointCount;
  std::size_t hidden = 64;
  std::size_t latent = 8;
  double alpha = 0.9;

  std::size_t frame_dim() const noexcept { return pmotion::frame_dim(joints); }
  void validate() const;
};

// --- building blocks ----------------------------------------------------------

struct Dense {
  std::size_t weight = 0;
  std::size_t bias = 0;
  std::size_t in = 0;
  std::size_t out = 0;

  ad::Var apply(const BoundParams& p, ad::Var x) const;
};

// W ~ U(-1/sqrt(in), 1/sqrt(in)), b = 0.
Dense make_dense(ParamSet& params, const std::string& name, std::size_t in, std::size_t out, Rng& rng);

struct CellState {
  ad::Var h;
  ad::Var c;  // LSTM only
};

// GRU:  z = s(Wz x + Uz h + bz), r = s(Wr x + Ur h + br),
//       h~ = tanh(Wh x + Uh (r * h) + bh), h' = (1 - z) * h + z * h~
// LSTM: i, f, o = s(.), g = tanh(.), c' = f * c + i * g, h' = o * tanh(c')
struct RnnCell {
  CellKind kind = CellKind::Gru;
  std::size_t in = 0;
  std::size_t hidden = 0;
  std::size_t w_x = 0;  // [gates*H x in]
  std::size_t u_a = 0;  // GRU: [2H x H] for z, r; LSTM: [4H x H]
  std::size_t u_b = 0;  // GRU: [H x H] candidate; unused for LSTM
  std::size_t bias = 0;

  CellState zero_state(ad::Tape& tape) const;
  CellState step(const BoundParams& p, ad::Var x, const CellState& s) const;
};

RnnCell make_cell(ParamSet& params, const std::string& name, CellKind kind, std::size_t in, std::size_t hidden,
                  Rng& rng);

struct LatentVar {
  ad::Var mean;
  ad::Var logvar;
};

struct LatentGaussian {
  std::vector<double> mean;
  std::vector<double> logvar;
};

// z = mean + exp(logvar / 2) * eps, or z = mean when deterministic (no draw).
ad::Var sample_latent(const LatentVar& g, Rng& rng, bool deterministic);
std::vector<double> sample_latent(const LatentGaussian& g, Rng& rng, bool deterministic);

// alpha * previous + (1 - alpha) * output
ad::Var alpha_residual(ad::Var previous, ad::Var output, double alpha);
std::vector<double> alpha_residual(std::span<const double> previous, std::span<const double> output, double alpha);

struct Stream {
  std::size_t own_offset = 0;
  std::size_t own_dim = 0;
  std::size_t other_offset = 0;
  std::size_t other_dim = 0;
  Dense enc1, enc2, mean_head, logvar_head;
  RnnCell rnn;
  Dense dec1, dec2, head;

  LatentVar encode_posterior(const BoundParams& p, ad::Var own, ad::Var other, ad::Var hidden) const;
};

struct TwoStreamNet {
  Stream translation;
  Stream pose;
};

struct VqNet {
  RnnCell gru1, gru2;
  Dense mean_head, logvar_head;
  Dense dec1, dec2;
};

struct ModelState {
  std::vector<CellState> cells;
};

struct StepOutput {
  ad::Var next_frame;
  ModelState state;
  // Two-stream: {translation, pose}. VQ/Q: one entry.
  std::vector<LatentVar> posteriors;
};

class Model {
 public:
  Model(const ModelConfig& config, std::uint64_t init_seed);
  // Adopts tensors loaded from a checkpoint; names and shapes must match the layout.
  Model(const ModelConfig& config, ParamSet params);

  const ModelConfig& config() const noexcept { return config_; }
  const ParamSet& params() const noexcept { return params_; }
  ParamSet& params() noexcept { return params_; }

  ModelState initial_state(ad::Tape& tape) const;

  // One step: previous frame in, next frame out. Q models always use z = mean.
  StepOutput step(const BoundParams& p, ad::Var prev_frame, const ModelState& state, Rng& rng,
                  bool deterministic) const;

  const TwoStreamNet* two_stream() const noexcept { return std::get_if<TwoStreamNet>(&net_); }
  const VqNet* vq() const noexcept { return std::get_if<VqNet>(&net_); }

 private:
  StepOutput two_stream_step(const TwoStreamNet& net, const BoundParams& p, ad::Var prev, const ModelState& state,
                             Rng& rng, bool deterministic) const;
  StepOutput vq_step(const VqNet& net, const BoundParams& p, ad::Var prev, const ModelState& state, Rng& rng,
                     bool deterministic) const;

  ModelConfig config_;
  ParamSet params_;
  std::variant<TwoStreamNet, VqNet> net_;
};

// Free-running evaluation helper: steps the model on plain values, reusing
// one tape per step so memory stays flat over arbitrarily long rollouts.
class Stepper {
 public:
  explicit Stepper(const Model& model);

  struct Result {
    std::vector<double> next_frame;
    std::vector<LatentGaussian> posteriors;
  };

  Result step(std::span<const double> prev_frame, Rng& rng, bool deterministic);
  void reset();

 private:
  const Model& model_;
  ad::Tape tape_;
  std::vector<std::vector<double>> hidden_;
  std::vector<std::vector<double>> cell_;
};

}  // namespace pmotion
