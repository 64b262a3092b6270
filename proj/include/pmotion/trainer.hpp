#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pmotion/adam.hpp"
#include "pmotion/model.hpp"
#include "pmotion/motion.hpp"
#include "pmotion/objective.hpp"

namespace pmotion {

struct TrainConfig {
  std::size_t window = 64;
  std::size_t stride = 32;
  std::size_t steps = 5000;
  double lr = 1e-3;
  double clip_norm = 5.0;
  double alpha = 0.9;
  std::size_t hidden = 64;
  std::size_t latent = 8;
  CellKind cell = CellKind::Gru;
  ModelKind model = ModelKind::TwoStream;
  std::uint64_t seed = 0;
  LossWeights weights;
  KlPenalty kl_penalty = KlPenalty::Charbonnier;
  std::string pose_prior = "none";
  int fps = 30;
  std::size_t joints = kDefaultJointCount;
  std::vector<std::string> data;
  std::size_t checkpoint_every = 0;  // 0: only at the end

  ModelConfig model_config() const;
  void validate() const;
};

struct WindowRef {
  std::size_t sequence = 0;
  std::size_t start = 0;
};

// Starts 0, S, 2S, ... while start + W <= length.
std::vector<WindowRef> make_windows(const MotionSequence& seq, std::size_t window, std::size_t stride,
                                    std::size_t sequence_index = 0);
// Throws EmptyDataset if no sequence is long enough.
std::vector<WindowRef> make_windows(const std::vector<MotionSequence>& dataset, std::size_t window,
                                    std::size_t stride);

struct TrainLogRecord {
  std::size_t step = 0;  // 1-based
  LossBreakdown loss;
  double mean_phi = 0.0;
  double seconds = 0.0;
  double grad_norm = 0.0;  // before clipping
};

// step,recon_frame,recon_timediff,kl_t,kl_p,prior,total,mean_phi,seconds
std::string train_log_header();
std::string format_train_log_row(const TrainLogRecord& r);
void write_train_log(const std::vector<TrainLogRecord>& log, const std::filesystem::path& path);

// Scales all gradients in place so their joint L2 norm is at most max_norm.
// Returns the norm before scaling.
double clip_global_norm(std::vector<ad::Tensor>& grads, double max_norm);

struct TrainHooks {
  // Called with (step, model, optimizer) every checkpoint_every steps and after the last step.
  std::function<void(std::size_t, const Model&, const ad::AdamState&)> on_checkpoint;
  std::function<void(const TrainLogRecord&)> on_log;
};

struct TrainResult {
  Model model;
  ad::AdamState optimizer;
  std::vector<TrainLogRecord> log;
};

// Teacher-forced truncated BPTT: each step samples one window, resets the RNN
// state to zeros, unrolls over the window feeding ground-truth previous
// frames, and takes one clipped Adam step on the window objective.
// `dataset` is expected to be canonicalized. On NumericFault the exception
// message names the failing step.
TrainResult train_run(const TrainConfig& config, const std::vector<MotionSequence>& dataset,
                      const TrainHooks& hooks = {});

// Window objective for a given model (used by training, gradient checks and
// representation-power evaluation). `noise` is consumed only when sampling.
struct WindowEvaluation {
  WindowLoss loss;
  std::vector<ad::Var> predicted;
};
WindowEvaluation evaluate_window(ad::Tape& tape, const Model& model, const BoundParams& params,
                                 const MotionSequence& seq, std::size_t start, std::size_t length, Rng& noise,
                                 bool deterministic, const WindowLossOptions& options);

WindowLossOptions loss_options(const TrainConfig& config, const PosePrior* prior);

}  // namespace pmotion
