#include "pmotion/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>

#include "pmotion/pmf.hpp"
#include "pmotion/random.hpp"

namespace pmotion {

ModelConfig TrainConfig::model_config() const {
  ModelConfig m;
  m.kind = model;
  m.cell = cell;
  m.joints = joints;
  m.hidden = hidden;
  m.latent = latent;
  m.alpha = alpha;
  return m;
}

void TrainConfig::validate() const {
  if (window < 3) throw DomainError("window must be at least 3 frames");
  if (stride < 1) throw DomainError("stride must be at least 1");
  if (!(clip_norm > 0.0)) throw DomainError("clip_norm must be positive");
  if (!(lr >= 0.0)) throw DomainError("lr must be nonnegative");
  if (!(alpha >= 0.0 && alpha < 1.0)) throw DomainError("alpha must satisfy 0 <= alpha < 1");
  if (weights.ts < 0.0 || weights.vp < 0.0 || weights.kl < 0.0) throw DomainError("loss weights must be nonnegative");
  if (fps <= 0) throw DomainError("fps must be positive");
  model_config().validate();
}

std::vector<WindowRef> make_windows(const MotionSequence& seq, std::size_t window, std::size_t stride,
                                    std::size_t sequence_index) {
  if (window < 3) throw DomainError("window must be at least 3 frames");
  if (stride < 1) throw DomainError("stride must be at least 1");
  std::vector<WindowRef> out;
  for (std::size_t s = 0; s + window <= seq.frame_count(); s += stride) out.push_back({sequence_index, s});
  return out;
}

std::vector<WindowRef> make_windows(const std::vector<MotionSequence>& dataset, std::size_t window,
                                    std::size_t stride) {
  std::vector<WindowRef> out;
  for (std::size_t i = 0; i < dataset.size(); ++i) {
    const auto w = make_windows(dataset[i], window, stride, i);
    out.insert(out.end(), w.begin(), w.end());
  }
  if (out.empty()) throw EmptyDataset("no sequence is at least " + std::to_string(window) + " frames long");
  return out;
}

std::string train_log_header() { return "step,recon_frame,recon_timediff,kl_t,kl_p,prior,total,mean_phi,seconds"; }

std::string format_train_log_row(const TrainLogRecord& r) {
  const LossBreakdown& l = r.loss;
  return std::to_string(r.step) + "," + format_double(l.recon_frame) + "," + format_double(l.recon_timediff) + "," +
         format_double(l.kl_translation_stream) + "," + format_double(l.kl_pose_stream) + "," +
         format_double(l.pose_prior) + "," + format_double(l.total) + "," + format_double(r.mean_phi) + "," +
         format_double(r.seconds);
}

void write_train_log(const std::vector<TrainLogRecord>& log, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << train_log_header() << '\n';
  for (const auto& r : log) out << format_train_log_row(r) << '\n';
  if (!out) throw IoError("write failed for " + path.string());
}

double clip_global_norm(std::vector<ad::Tensor>& grads, double max_norm) {
  double sq = 0.0;
  for (const auto& g : grads)
    for (double v : g.data()) sq += v * v;
  const double norm = std::sqrt(sq);
  if (norm > max_norm) {
    const double factor = max_norm / norm;
    for (auto& g : grads)
      for (double& v : g.data()) v *= factor;
  }
  return norm;
}

WindowLossOptions loss_options(const TrainConfig& config, const PosePrior* prior) {
  WindowLossOptions o;
  o.weights = config.weights;
  o.penalty = config.kl_penalty;
  o.include_kl = config.model != ModelKind::Q;
  o.prior = prior;
  return o;
}

WindowEvaluation evaluate_window(ad::Tape& tape, const Model& model, const BoundParams& params,
                                 const MotionSequence& seq, std::size_t start, std::size_t length, Rng& noise,
                                 bool deterministic, const WindowLossOptions& options) {
  if (length < 2 || start + length > seq.frame_count()) throw ShapeMismatch("evaluate_window: bad frame range");
  if (seq.joint_count() != model.config().joints) throw ShapeMismatch("sequence joint count does not match model");

  std::vector<ad::Var> truth;
  truth.reserve(length);
  for (std::size_t i = 0; i < length; ++i) {
    const auto f = seq.frame(start + i);
    truth.push_back(tape.constant(f, f.size()));
  }

  WindowEvaluation out;
  ModelState state = model.initial_state(tape);
  const std::size_t streams = model.two_stream() ? 2 : 1;
  std::vector<std::vector<LatentVar>> posteriors(streams);
  for (std::size_t i = 0; i + 1 < length; ++i) {
    StepOutput step = model.step(params, truth[i], state, noise, deterministic);
    out.predicted.push_back(step.next_frame);
    for (std::size_t s = 0; s < streams; ++s) posteriors[s].push_back(step.posteriors[s]);
    state = std::move(step.state);
  }
  out.loss = window_loss(tape, out.predicted, truth, posteriors, FrameLayout::for_joints(seq.joint_count()), options);
  return out;
}

TrainResult train_run(const TrainConfig& config, const std::vector<MotionSequence>& dataset,
                      const TrainHooks& hooks) {
  config.validate();
  for (const auto& seq : dataset) {
    if (seq.joint_count() != config.joints) throw ShapeMismatch("dataset joint count does not match config");
  }
  const auto windows = make_windows(dataset, config.window, config.stride);

  TrainResult result{Model(config.model_config(), mix64(config.seed)), {}, {}};
  Model& model = result.model;
  result.optimizer = ad::AdamState(ad::AdamConfig{config.lr}, model.params().tensors());

  const auto prior = make_pose_prior(config.pose_prior);
  const WindowLossOptions options = loss_options(config, prior.get());
  Rng window_rng = Rng::derive(config.seed, 1);
  Rng noise_rng = Rng::derive(config.seed, 2);
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<ad::Tensor> grads;
  for (std::size_t step = 1; step <= config.steps; ++step) {
    const WindowRef w = windows[window_rng.below(windows.size())];
    TrainLogRecord rec;
    rec.step = step;
    try {
      ad::Tape tape;
      const BoundParams bound(tape, model.params());
      const WindowEvaluation eval = evaluate_window(tape, model, bound, dataset[w.sequence], w.start, config.window,
                                                    noise_rng, false, options);
      const ad::Gradients g = tape.backward(eval.loss.total);
      grads.clear();
      for (std::size_t i = 0; i < bound.size(); ++i) grads.push_back(g.tensor(bound[i]));
      rec.loss = eval.loss.values();
      rec.loss.neg_log_p = rec.loss.total - (options.prior && options.prior->enabled()
                                                 ? config.weights.vp * rec.loss.pose_prior
                                                 : 0.0);
      rec.mean_phi = eval.loss.mean_phi;
    } catch (const NumericFault& e) {
      throw NumericFault("training step " + std::to_string(step) + ": " + e.what());
    }
    rec.grad_norm = clip_global_norm(grads, config.clip_norm);
    ad::adam_step(result.optimizer, model.params().tensors(), grads);
    rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (hooks.on_log) hooks.on_log(rec);
    result.log.push_back(rec);

    const bool periodic = config.checkpoint_every > 0 && step % config.checkpoint_every == 0;
    if (hooks.on_checkpoint && (periodic || step == config.steps)) hooks.on_checkpoint(step, model, result.optimizer);
  }
  if (config.steps == 0 && hooks.on_checkpoint) hooks.on_checkpoint(0, model, result.optimizer);
  return result;
}

}  // namespace pmotion
