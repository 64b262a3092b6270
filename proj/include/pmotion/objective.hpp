#pragma once
// Training objective.
//
//   total = recon_frame + l_ts * recon_timediff + l_kl * (kl_t + kl_p) / 2 + l_vp * prior
//
// with, per stream, kl = psi(sum_m phi_m), psi(s) = sqrt(1 + s^2) - 1 and
// phi_m = sum_d (sigma^2 + mu^2 - 1 - log sigma^2) the step-m divergence from
// N(0, I). Every reconstruction term is a mean absolute error over elements
// and steps, taken separately for translation and pose and then added.
//
// Each quantity has a plain-value form (evaluation, tests) and a tape form
// (training); the two are checked against each other in the unit tests.

#include <memory>
#include <span>
#include <string_view>
#include <vector>

#include "pmotion/model.hpp"
#include "pmotion/tape.hpp"

namespace pmotion {

struct LossWeights {
  double ts = 5.0;
  double vp = 1e-4;
  double kl = 1.0;
};

// Identity exists only as the contrast setting for collapse experiments.
enum class KlPenalty { Charbonnier, Identity };
std::string_view to_string(KlPenalty p) noexcept;

// psi(s); DomainError for s < 0.
double charbonnier(double s);
// d psi / ds = s / sqrt(1 + s^2)
double charbonnier_grad(double s);

double kl_unit_gaussian(const LatentGaussian& g);
// psi(sum phi); DomainError if any phi < 0.
double stream_kl(std::span<const double> phi, KlPenalty penalty = KlPenalty::Charbonnier);

struct FrameLayout {
  std::size_t translation_dim = kTranslationDim;
  std::size_t pose_dim = 0;

  std::size_t frame_dim() const noexcept { return translation_dim + pose_dim; }
  static FrameLayout for_joints(std::size_t joints) { return {kTranslationDim, kRotationDim * joints}; }
};

struct ReconstructionTerms {
  double frame = 0.0;
  double timediff = 0.0;
};

// `truth` holds frames 1..n, `predicted` frames 2..n (row-major, frame_dim each).
ReconstructionTerms reconstruction_loss(std::span<const double> predicted, std::span<const double> truth,
                                        FrameLayout layout);

// Plug point for a learned pose-naturalness prior. Input is the predicted pose
// sequence without the pelvis rotation, frames concatenated.
class PosePrior {
 public:
  virtual ~PosePrior() = default;
  virtual std::string_view name() const noexcept = 0;
  virtual bool enabled() const noexcept { return true; }
  virtual double evaluate(std::span<const double> poses) const = 0;
  virtual ad::Var evaluate(ad::Tape& tape, ad::Var poses) const = 0;
};

class NullPrior final : public PosePrior {
 public:
  std::string_view name() const noexcept override { return "none"; }
  bool enabled() const noexcept override { return false; }
  double evaluate(std::span<const double>) const override { return 0.0; }
  ad::Var evaluate(ad::Tape& tape, ad::Var) const override { return tape.scalar(0.0); }
};

// sum of squares of the pose values
class SquaredNormPrior final : public PosePrior {
 public:
  std::string_view name() const noexcept override { return "squared_norm"; }
  double evaluate(std::span<const double> poses) const override;
  ad::Var evaluate(ad::Tape& tape, ad::Var poses) const override;
};

// "none" or "squared_norm"; throws DomainError otherwise.
std::unique_ptr<PosePrior> make_pose_prior(std::string_view name);

// Strips the pelvis rotation from each frame of a row-major frame block.
std::vector<double> poses_without_pelvis(std::span<const double> frames, FrameLayout layout);

struct LossBreakdown {
  double recon_frame = 0.0;
  double recon_timediff = 0.0;
  double kl_translation_stream = 0.0;
  double kl_pose_stream = 0.0;
  double pose_prior = 0.0;
  double total = 0.0;
  double neg_log_p = 0.0;  // total without the prior term
};

// The prior term contributes only when `prior_enabled`.
LossBreakdown total_loss(double recon_frame, double recon_timediff, double kl_t, double kl_p, double prior,
                         const LossWeights& w, bool prior_enabled = false);

// Tape form of the whole window objective.
struct WindowLoss {
  ad::Var recon_frame, recon_timediff, kl_t, kl_p, prior, total;
  double mean_phi = 0.0;  // average per-step phi over both streams
  LossBreakdown values() const;
};

struct WindowLossOptions {
  LossWeights weights;
  KlPenalty penalty = KlPenalty::Charbonnier;
  bool include_kl = true;  // false for the deterministic Q baseline
  const PosePrior* prior = nullptr;
};

// `predicted[k]` is the model output for frame k+2 given frames up to k+1;
// `truth` holds frames 1..n. posteriors[s][k] is stream s at step k; a model
// with a single posterior stream reports it as both kl_t and kl_p.
WindowLoss window_loss(ad::Tape& tape, std::span<const ad::Var> predicted, std::span<const ad::Var> truth,
                       const std::vector<std::vector<LatentVar>>& posteriors, FrameLayout layout,
                       const WindowLossOptions& options);

ad::Var charbonnier(ad::Var s);
ad::Var kl_unit_gaussian(const LatentVar& g);

}  // namespace pmotion
