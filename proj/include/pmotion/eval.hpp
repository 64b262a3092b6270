#pragma once
// Evaluation metrics: power-spectrum entropy ratio and KL divergence,
// sample diversity, and teacher-forced representation power.

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "pmotion/model.hpp"
#include "pmotion/motion.hpp"
#include "pmotion/objective.hpp"

namespace pmotion {

inline constexpr double kSpectrumEpsilon = 1e-8;

// Per feature dimension, |FFT|^2 over bins 0..frames/2, plus epsilon, scaled to sum 1.
struct PowerSpectrum {
  std::size_t dims = 0;
  std::size_t bins = 0;
  std::vector<double> weights;  // dims x bins, row-major

  std::span<const double> dim(std::size_t d) const { return {weights.data() + d * bins, bins}; }
};

// `values` is frames x dims row-major. TooShort below 2 frames.
PowerSpectrum power_spectrum(std::span<const double> values, std::size_t frames, std::size_t dims);
PowerSpectrum power_spectrum(const MotionSequence& seq);

double spectrum_entropy(std::span<const double> p);

// Mean over dimensions of (H_gen - H_gt) / H_gt. ShapeMismatch on differing shapes.
double pser(const PowerSpectrum& gen, const PowerSpectrum& gt);
// Mean over dimensions of (KL(gt||gen) + KL(gen||gt)) / 2.
double pskld(const PowerSpectrum& gen, const PowerSpectrum& gt);

struct SpectralScores {
  double pser = 0.0;
  double pskld = 0.0;
};
// Truncates both to the shorter frame count before comparing.
SpectralScores spectral_compare(const MotionSequence& gen, const MotionSequence& gt);

// Population standard deviation across samples, averaged over frames and
// dimensions. Frames before `first_frame` are skipped. Needs >= 2 samples of
// equal shape.
double diversity(std::span<const MotionSequence> samples, std::size_t first_frame = 0);

struct ReprScores {
  double e_rec = 0.0;
  double e_trec = 0.0;
  double neg_log_p = 0.0;
};

// Teacher-forced pass over each full sequence with z = mean. The KL term uses
// the Charbonnier penalty and is left out for the Q baseline, matching its
// training objective. EmptyDataset on an empty input.
std::vector<ReprScores> repr_power_eval(const Model& model, std::span<const MotionSequence> dataset,
                                        const LossWeights& weights);
ReprScores mean_scores(std::span<const ReprScores> rows);

struct ReportRow {
  std::string sequence;
  std::optional<double> e_rec, e_trec, neg_log_p, pser, pskld, diversity;
};

// sequence,e_rec,e_trec,neg_log_p,pser,pskld,diversity plus a final "mean"
// row. Missing values are written as empty fields and skipped in the mean.
std::string format_report(std::span<const ReportRow> rows);
// Writes the CSV; with `plot_dir`, also one "<index> <value>" series per metric.
void emit_report(std::span<const ReportRow> rows, const std::filesystem::path& csv,
                 const std::optional<std::filesystem::path>& plot_dir = std::nullopt);

}  // namespace pmotion
