#include "pmotion/eval.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <mutex>

#include "pmotion/pmf.hpp"

namespace pmotion {
namespace {

// FFTW planning is not thread-safe; execution on a private plan is.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

struct FftwFree {
  void operator()(void* p) const { fftw_free(p); }
};

}  // namespace

PowerSpectrum power_spectrum(std::span<const double> values, std::size_t frames, std::size_t dims) {
  if (frames < 2) throw TooShort("power spectrum needs at least 2 frames");
  if (dims == 0 || values.size() != frames * dims) throw ShapeMismatch("spectrum input is not frames x dims");

  const std::size_t bins = frames / 2 + 1;
  std::unique_ptr<double, FftwFree> in(static_cast<double*>(fftw_malloc(sizeof(double) * frames)));
  std::unique_ptr<fftw_complex, FftwFree> out(
      static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * bins)));
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(frames), in.get(), out.get(), FFTW_ESTIMATE);
  }

  PowerSpectrum s{dims, bins, std::vector<double>(dims * bins)};
  for (std::size_t d = 0; d < dims; ++d) {
    for (std::size_t t = 0; t < frames; ++t) in.get()[t] = values[t * dims + d];
    fftw_execute(plan);
    double* w = s.weights.data() + d * bins;
    double total = 0.0;
    for (std::size_t k = 0; k < bins; ++k) {
      const double re = out.get()[k][0];
      const double im = out.get()[k][1];
      w[k] = re * re + im * im + kSpectrumEpsilon;
      total += w[k];
    }
    for (std::size_t k = 0; k < bins; ++k) w[k] /= total;
  }

  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  return s;
}

PowerSpectrum power_spectrum(const MotionSequence& seq) {
  return power_spectrum(seq.values(), seq.frame_count(), seq.frame_dim());
}

double spectrum_entropy(std::span<const double> p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

static void check_same_shape(const PowerSpectrum& a, const PowerSpectrum& b) {
  if (a.dims != b.dims || a.bins != b.bins) throw ShapeMismatch("spectra differ in dimensions or bins");
  if (a.dims == 0) throw ShapeMismatch("empty spectrum");
}

double pser(const PowerSpectrum& gen, const PowerSpectrum& gt) {
  check_same_shape(gen, gt);
  double acc = 0.0;
  for (std::size_t d = 0; d < gt.dims; ++d) {
    const double h_gt = spectrum_entropy(gt.dim(d));
    const double h_gen = spectrum_entropy(gen.dim(d));
    acc += (h_gen - h_gt) / h_gt;
  }
  return acc / static_cast<double>(gt.dims);
}

double pskld(const PowerSpectrum& gen, const PowerSpectrum& gt) {
  check_same_shape(gen, gt);
  double acc = 0.0;
  for (std::size_t d = 0; d < gt.dims; ++d) {
    const auto p = gt.dim(d);
    const auto q = gen.dim(d);
    double kl_pq = 0.0;
    double kl_qp = 0.0;
    for (std::size_t k = 0; k < gt.bins; ++k) {
      const double lr = std::log(p[k]) - std::log(q[k]);
      kl_pq += p[k] * lr;
      kl_qp -= q[k] * lr;
    }
    acc += 0.5 * (kl_pq + kl_qp);
  }
  return acc / static_cast<double>(gt.dims);
}

SpectralScores spectral_compare(const MotionSequence& gen, const MotionSequence& gt) {
  if (gen.frame_dim() != gt.frame_dim()) throw ShapeMismatch("generated and reference differ in frame size");
  const std::size_t n = std::min(gen.frame_count(), gt.frame_count());
  const auto sg = power_spectrum(std::span(gen.values()).first(n * gen.frame_dim()), n, gen.frame_dim());
  const auto st = power_spectrum(std::span(gt.values()).first(n * gt.frame_dim()), n, gt.frame_dim());
  return {pser(sg, st), pskld(sg, st)};
}

double diversity(std::span<const MotionSequence> samples, std::size_t first_frame) {
  if (samples.size() < 2) throw ShapeMismatch("diversity needs at least 2 samples");
  const std::size_t frames = samples[0].frame_count();
  const std::size_t dims = samples[0].frame_dim();
  for (const auto& s : samples) {
    if (s.frame_count() != frames || s.frame_dim() != dims) throw ShapeMismatch("samples differ in shape");
  }
  if (first_frame >= frames) throw ShapeMismatch("no generated frames to compare");

  const double k = static_cast<double>(samples.size());
  double acc = 0.0;
  for (std::size_t t = first_frame; t < frames; ++t) {
    for (std::size_t d = 0; d < dims; ++d) {
      // Offsets from the first sample keep identical samples at exactly zero.
      const double ref = samples[0].frame(t)[d];
      double mean = 0.0;
      for (const auto& s : samples) mean += s.frame(t)[d] - ref;
      mean /= k;
      double var = 0.0;
      for (const auto& s : samples) {
        const double e = s.frame(t)[d] - ref - mean;
        var += e * e;
      }
      acc += std::sqrt(var / k);
    }
  }
  return acc / static_cast<double>((frames - first_frame) * dims);
}

std::vector<ReprScores> repr_power_eval(const Model& model, std::span<const MotionSequence> dataset,
                                        const LossWeights& weights) {
  if (dataset.empty()) throw EmptyDataset("no sequences to evaluate");
  const auto layout = FrameLayout::for_joints(model.config().joints);
  const bool with_kl = model.config().kind != ModelKind::Q;

  std::vector<ReprScores> rows;
  rows.reserve(dataset.size());
  Stepper stepper(model);
  Rng unused(0);
  for (const auto& seq : dataset) {
    if (seq.frame_dim() != layout.frame_dim()) throw ShapeMismatch("sequence does not match the model's joints");
    if (seq.frame_count() < 3) throw TooShort("representation power needs at least 3 frames");
    stepper.reset();
    std::vector<double> predicted;
    predicted.reserve((seq.frame_count() - 1) * layout.frame_dim());
    std::vector<std::vector<double>> phi;
    for (std::size_t i = 0; i + 1 < seq.frame_count(); ++i) {
      auto r = stepper.step(seq.frame(i), unused, true);
      predicted.insert(predicted.end(), r.next_frame.begin(), r.next_frame.end());
      phi.resize(r.posteriors.size());
      for (std::size_t s = 0; s < r.posteriors.size(); ++s) phi[s].push_back(kl_unit_gaussian(r.posteriors[s]));
    }
    const auto rec = reconstruction_loss(predicted, seq.values(), layout);
    double kl = 0.0;
    if (with_kl && !phi.empty()) {
      for (const auto& p : phi) kl += stream_kl(p);
      kl /= static_cast<double>(phi.size());
    }
    rows.push_back({rec.frame, rec.timediff, rec.frame + weights.ts * rec.timediff + weights.kl * kl});
  }
  return rows;
}

ReprScores mean_scores(std::span<const ReprScores> rows) {
  ReprScores m;
  if (rows.empty()) return m;
  for (const auto& r : rows) {
    m.e_rec += r.e_rec;
    m.e_trec += r.e_trec;
    m.neg_log_p += r.neg_log_p;
  }
  const double n = static_cast<double>(rows.size());
  m.e_rec /= n;
  m.e_trec /= n;
  m.neg_log_p /= n;
  return m;
}

namespace {

using Column = std::optional<double> ReportRow::*;
constexpr Column kColumns[] = {&ReportRow::e_rec, &ReportRow::e_trec, &ReportRow::neg_log_p,
                               &ReportRow::pser,  &ReportRow::pskld,  &ReportRow::diversity};
constexpr const char* kColumnNames[] = {"e_rec", "e_trec", "neg_log_p", "pser", "pskld", "diversity"};

void append_cell(std::string& out, const std::optional<double>& v) {
  out += ',';
  if (v) out += format_double(*v);
}

}  // namespace

std::string format_report(std::span<const ReportRow> rows) {
  if (rows.empty()) throw DomainError("report needs at least one row");
  std::string out = "sequence,e_rec,e_trec,neg_log_p,pser,pskld,diversity\n";
  for (const auto& r : rows) {
    if (r.sequence.find_first_of(",\n") != std::string::npos) throw DomainError("sequence name contains , or newline");
    out += r.sequence;
    for (auto c : kColumns) append_cell(out, r.*c);
    out += '\n';
  }
  out += "mean";
  for (auto c : kColumns) {
    double sum = 0.0;
    std::size_t n = 0;
    for (const auto& r : rows) {
      if (r.*c) {
        sum += *(r.*c);
        ++n;
      }
    }
    append_cell(out, n ? std::optional(sum / static_cast<double>(n)) : std::nullopt);
  }
  out += '\n';
  return out;
}

static void write_text(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  out << text;
  if (!out) throw IoError("cannot write " + path.string());
}

void emit_report(std::span<const ReportRow> rows, const std::filesystem::path& csv,
                 const std::optional<std::filesystem::path>& plot_dir) {
  write_text(csv, format_report(rows));
  if (!plot_dir) return;
  for (std::size_t c = 0; c < std::size(kColumns); ++c) {
    std::string series;
    for (std::size_t i = 0; i < rows.size(); ++i) {
      if (const auto& v = rows[i].*kColumns[c]) series += std::to_string(i) + ' ' + format_double(*v) + '\n';
    }
    if (!series.empty()) write_text(*plot_dir / (std::string(kColumnNames[c]) + ".dat"), series);
  }
}

}  // namespace pmotion
