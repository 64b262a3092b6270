#include "pmotion/objective.hpp"

#include <cmath>
#include <string>

namespace pmotion {

using ad::Var;

std::string_view to_string(KlPenalty p) noexcept { return p == KlPenalty::Charbonnier ? "charbonnier" : "identity"; }

double charbonnier(double s) {
  if (!(s >= 0.0)) throw DomainError("charbonnier: argument must be nonnegative");
  // s^2 / (sqrt(1 + s^2) + 1) avoids cancellation for small s.
  return s * s / (std::sqrt(1.0 + s * s) + 1.0);
}

double charbonnier_grad(double s) { return s / std::sqrt(1.0 + s * s); }

double kl_unit_gaussian(const LatentGaussian& g) {
  if (g.mean.size() != g.logvar.size()) throw ShapeMismatch("latent mean and log-variance differ in size");
  double phi = 0.0;
  for (std::size_t i = 0; i < g.mean.size(); ++i) {
    phi += std::exp(g.logvar[i]) + g.mean[i] * g.mean[i] - 1.0 - g.logvar[i];
  }
  return phi;
}

double stream_kl(std::span<const double> phi, KlPenalty penalty) {
  double s = 0.0;
  for (double v : phi) {
    if (!(v >= 0.0)) throw DomainError("stream_kl: per-step divergence must be nonnegative");
    s += v;
  }
  return penalty == KlPenalty::Charbonnier ? charbonnier(s) : s;
}

ReconstructionTerms reconstruction_loss(std::span<const double> predicted, std::span<const double> truth,
                                        FrameLayout layout) {
  const std::size_t D = layout.frame_dim();
  if (D == 0 || truth.size() % D != 0 || truth.size() < 2 * D) {
    throw ShapeMismatch("reconstruction_loss: truth must hold at least two whole frames");
  }
  const std::size_t n = truth.size() / D;
  if (predicted.size() != (n - 1) * D) {
    throw ShapeMismatch("reconstruction_loss: expected " + std::to_string(n - 1) + " predicted frames");
  }
  const std::size_t steps = n - 1;
  auto diff = [&](std::size_t k, std::size_t i) { return predicted[k * D + i] - truth[(k + 1) * D + i]; };

  double frame_t = 0.0, frame_p = 0.0, td_t = 0.0, td_p = 0.0;
  for (std::size_t k = 0; k < steps; ++k) {
    for (std::size_t i = 0; i < D; ++i) {
      const double d = std::fabs(diff(k, i));
      (i < layout.translation_dim ? frame_t : frame_p) += d;
      if (k > 0) {
        const double dd = std::fabs(diff(k, i) - diff(k - 1, i));
        (i < layout.translation_dim ? td_t : td_p) += dd;
      }
    }
  }
  auto mean = [](double total, std::size_t count) { return count == 0 ? 0.0 : total / static_cast<double>(count); };
  ReconstructionTerms r;
  r.frame = mean(frame_t, layout.translation_dim * steps) + mean(frame_p, layout.pose_dim * steps);
  r.timediff = mean(td_t, layout.translation_dim * (steps - 1)) + mean(td_p, layout.pose_dim * (steps - 1));
  return r;
}

double SquaredNormPrior::evaluate(std::span<const double> poses) const {
  double s = 0.0;
  for (double v : poses) s += v * v;
  return s;
}

Var SquaredNormPrior::evaluate(ad::Tape&, Var poses) const { return sum(square(poses)); }

std::unique_ptr<PosePrior> make_pose_prior(std::string_view name) {
  if (name == "none") return std::make_unique<NullPrior>();
  if (name == "squared_norm") return std::make_unique<SquaredNormPrior>();
  throw DomainError("unknown pose prior '" + std::string(name) + "'");
}

std::vector<double> poses_without_pelvis(std::span<const double> frames, FrameLayout layout) {
  const std::size_t D = layout.frame_dim();
  const std::size_t skip = layout.translation_dim + std::min(kRotationDim, layout.pose_dim);
  std::vector<double> out;
  for (std::size_t k = 0; k + D <= frames.size(); k += D) out.insert(out.end(), frames.begin() + k + skip, frames.begin() + k + D);
  return out;
}

LossBreakdown total_loss(double recon_frame, double recon_timediff, double kl_t, double kl_p, double prior,
                         const LossWeights& w, bool prior_enabled) {
  LossBreakdown b;
  b.recon_frame = recon_frame;
  b.recon_timediff = recon_timediff;
  b.kl_translation_stream = kl_t;
  b.kl_pose_stream = kl_p;
  b.pose_prior = prior_enabled ? prior : 0.0;
  b.neg_log_p = recon_frame + w.ts * recon_timediff + w.kl * 0.5 * (kl_t + kl_p);
  b.total = b.neg_log_p + (prior_enabled ? w.vp * prior : 0.0);
  return b;
}

// --- tape forms -------------------------------------------------------------------

Var charbonnier(Var s) { return sqrt(square(s) + 1.0) - 1.0; }

Var kl_unit_gaussian(const LatentVar& g) {
  return sum(exp(g.logvar) + square(g.mean) - g.logvar) - static_cast<double>(g.mean.size());
}

LossBreakdown WindowLoss::values() const {
  LossBreakdown b;
  b.recon_frame = recon_frame.item();
  b.recon_timediff = recon_timediff.item();
  b.kl_translation_stream = kl_t.item();
  b.kl_pose_stream = kl_p.item();
  b.pose_prior = prior.item();
  b.total = total.item();
  return b;
}

namespace {

Var sum_of(ad::Tape& tape, const std::vector<Var>& scalars) {
  if (scalars.empty()) return tape.scalar(0.0);
  return sum(tape.concat(scalars));
}

}  // namespace

WindowLoss window_loss(ad::Tape& tape, std::span<const Var> predicted, std::span<const Var> truth,
                       const std::vector<std::vector<LatentVar>>& posteriors, FrameLayout layout,
                       const WindowLossOptions& options) {
  const std::size_t steps = predicted.size();
  if (steps == 0 || truth.size() != steps + 1) throw ShapeMismatch("window_loss: need n truth and n-1 predicted frames");
  if (posteriors.empty() || posteriors.size() > 2) throw ShapeMismatch("window_loss: one or two posterior streams");
  const std::size_t T = layout.translation_dim;
  const std::size_t P = layout.pose_dim;

  std::vector<Var> frame_t, frame_p, td_t, td_p;
  Var prev_diff;
  for (std::size_t k = 0; k < steps; ++k) {
    const Var d = predicted[k] - truth[k + 1];
    const Var ad = abs(d);
    frame_t.push_back(sum(slice(ad, 0, T)));
    if (P > 0) frame_p.push_back(sum(slice(ad, T, P)));
    if (k > 0) {
      const Var add = abs(d - prev_diff);
      td_t.push_back(sum(slice(add, 0, T)));
      if (P > 0) td_p.push_back(sum(slice(add, T, P)));
    }
    prev_diff = d;
  }

  auto mean_term = [&](const std::vector<Var>& parts, std::size_t dim, std::size_t count) {
    if (dim == 0 || count == 0) return tape.scalar(0.0);
    return sum_of(tape, parts) * (1.0 / static_cast<double>(dim * count));
  };

  WindowLoss out;
  out.recon_frame = mean_term(frame_t, T, steps) + mean_term(frame_p, P, steps);
  out.recon_timediff = mean_term(td_t, T, steps - 1) + mean_term(td_p, P, steps - 1);

  std::vector<Var> stream_terms;
  double phi_total = 0.0;
  std::size_t phi_count = 0;
  for (const auto& stream : posteriors) {
    std::vector<Var> phis;
    for (const auto& g : stream) {
      phis.push_back(kl_unit_gaussian(g));
      phi_total += phis.back().item();
      ++phi_count;
    }
    const Var s = sum_of(tape, phis);
    stream_terms.push_back(options.penalty == KlPenalty::Charbonnier ? charbonnier(s) : s);
  }
  out.kl_t = stream_terms.front();
  out.kl_p = stream_terms.back();
  out.mean_phi = phi_count ? phi_total / static_cast<double>(phi_count) : 0.0;

  const bool prior_on = options.prior != nullptr && options.prior->enabled();
  if (prior_on && P > kRotationDim) {
    std::vector<Var> poses;
    for (const Var& f : predicted) poses.push_back(slice(f, T + kRotationDim, P - kRotationDim));
    out.prior = options.prior->evaluate(tape, tape.concat(poses)) * (1.0 / static_cast<double>(steps));
  } else {
    out.prior = tape.scalar(0.0);
  }

  const LossWeights& w = options.weights;
  Var total = out.recon_frame + w.ts * out.recon_timediff;
  if (options.include_kl) total = total + (0.5 * w.kl) * (out.kl_t + out.kl_p);
  if (prior_on) total = total + w.vp * out.prior;
  out.total = total;
  return out;
}

}  // namespace pmotion
