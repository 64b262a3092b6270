#include "pmotion/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include "pmotion/canonical.hpp"
#include "pmotion/checkpoint.hpp"
#include "pmotion/config.hpp"
#include "pmotion/errors.hpp"
#include "pmotion/eval.hpp"
#include "pmotion/pmf.hpp"
#include "pmotion/rollout.hpp"
#include "pmotion/synth.hpp"
#include "pmotion/trainer.hpp"

namespace fs = std::filesystem;

namespace pmotion::cli {
namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void ensure_parent(const fs::path& file) {
  if (file.has_parent_path()) fs::create_directories(file.parent_path());
}

// *.pmf files directly inside `dir`, sorted by name.
std::vector<fs::path> motion_files(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError("not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".pmf") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw EmptyDataset("no .pmf files in " + dir.string());
  return files;
}

std::optional<std::size_t> boundary_for(const fs::path& pmf) {
  fs::path side = pmf;
  side.replace_extension(".boundary");
  if (!fs::exists(side)) return std::nullopt;
  return read_boundary_file(side);
}

// --- synth ----------------------------------------------------------------------

struct SynthArgs {
  std::size_t joints = kDefaultJointCount;
  int fps = 30;
  std::size_t frames = 600;
  std::uint64_t seed = 0;
  double amplitude = 0.3;
  double frequency = 1.0;
  double phase = 0.0;
  std::vector<double> velocity{0.0, 0.0, 0.0};
  std::size_t count = 0;
  std::vector<double> amplitude_range, frequency_range, speed_range;
  std::string out;
};

void add_synth(CLI::App& app, SynthArgs& a) {
  auto* c = app.add_subcommand("synth", "Write synthetic oscillatory motion");
  c->add_option("--joints", a.joints, "Joint count")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--fps", a.fps, "Frame rate")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--frames", a.frames, "Frames per sequence")->capture_default_str()->check(CLI::PositiveNumber);
  c->add_option("--seed", a.seed, "Generator seed")->capture_default_str();
  c->add_option("--amplitude", a.amplitude, "Joint amplitude in radians (single sequence)")->capture_default_str();
  c->add_option("--frequency", a.frequency, "Joint frequency in Hz (single sequence)")->capture_default_str();
  c->add_option("--phase", a.phase, "Joint phase in radians (single sequence)")->capture_default_str();
  c->add_option("--velocity", a.velocity, "Pelvis velocity x,y,z in m/s (single sequence)")
      ->delimiter(',')
      ->expected(3);
  c->add_option("--count", a.count,
                "Write this many random sequences as <out>/seq_<k>.pmf instead of one file");
  c->add_option("--amplitude-range", a.amplitude_range, "lo,hi for --count")->delimiter(',')->expected(2);
  c->add_option("--frequency-range", a.frequency_range, "lo,hi for --count")->delimiter(',')->expected(2);
  c->add_option("--speed-range", a.speed_range, "lo,hi for --count")->delimiter(',')->expected(2);
  c->add_option("--out", a.out, "Output file, or directory with --count")->required();
}

int do_synth(const SynthArgs& a, std::ostream& out) {
  if (a.count == 0) {
    SkeletonSpec spec = SkeletonSpec::uniform(a.joints, a.amplitude, a.frequency, a.phase);
    std::copy(a.velocity.begin(), a.velocity.end(), spec.velocity.begin());
    const fs::path path(a.out);
    ensure_parent(path);
    write_motion_file(synth_generate(spec, a.fps, a.frames, a.seed), path);
    out << "wrote " << path.string() << "\n";
    return kExitOk;
  }
  SynthRanges r;
  if (!a.amplitude_range.empty()) std::tie(r.amplitude_lo, r.amplitude_hi) = std::pair(a.amplitude_range[0], a.amplitude_range[1]);
  if (!a.frequency_range.empty()) std::tie(r.frequency_lo, r.frequency_hi) = std::pair(a.frequency_range[0], a.frequency_range[1]);
  if (!a.speed_range.empty()) std::tie(r.speed_lo, r.speed_hi) = std::pair(a.speed_range[0], a.speed_range[1]);
  const auto ds = synth_dataset(a.count, a.joints, a.fps, a.frames, r, a.seed);
  const fs::path dir(a.out);
  fs::create_directories(dir);
  for (std::size_t k = 0; k < ds.size(); ++k) write_motion_file(ds[k], dir / ("seq_" + std::to_string(k) + ".pmf"));
  out << "wrote " << ds.size() << " sequences to " << dir.string() << "\n";
  return kExitOk;
}

// --- train ----------------------------------------------------------------------

struct TrainArgs {
  std::string config, data, out, log;
};

void add_train(CLI::App& app, TrainArgs& a) {
  auto* c = app.add_subcommand("train", "Train a model and write a checkpoint");
  c->add_option("--config", a.config, "key=value configuration file");
  c->add_option("--data", a.data, "Directory of .pmf training sequences (overrides the data key)");
  c->add_option("--out", a.out, "Checkpoint path")->required();
  c->add_option("--log", a.log, "Per-step training log CSV");
}

std::vector<MotionSequence> load_training_data(const Config& cfg, const std::string& data_dir) {
  std::vector<fs::path> files;
  if (!data_dir.empty()) {
    files = motion_files(data_dir);
  } else {
    for (const auto& p : cfg.train.data) files.emplace_back(p);
  }
  if (files.empty()) throw UsageError("train needs --data or a data key in the configuration");
  std::vector<MotionSequence> ds;
  for (const auto& f : files) ds.push_back(canonicalize(read_motion_file(f)).sequence);
  return ds;
}

int do_train(const TrainArgs& a, std::ostream& out) {
  Config cfg = a.config.empty() ? Config{} : load_config(a.config);
  const auto ds = load_training_data(cfg, a.data);
  // The data decides the skeleton and frame rate.
  cfg.train.joints = ds.front().joint_count();
  cfg.train.fps = ds.front().fps();
  for (const auto& s : ds) {
    if (s.joint_count() != cfg.train.joints || s.fps() != cfg.train.fps) {
      throw ShapeMismatch("training sequences differ in joint count or frame rate");
    }
  }
  const std::string config_text = format_config(cfg);
  const fs::path ckpt(a.out);
  ensure_parent(ckpt);

  TrainHooks hooks;
  hooks.on_checkpoint = [&](std::size_t, const Model& m, const ad::AdamState& opt) {
    checkpoint_save(Checkpoint{config_text, m.params(), opt}, ckpt);
  };
  const auto result = train_run(cfg.train, ds, hooks);
  if (!a.log.empty()) {
    ensure_parent(a.log);
    write_train_log(result.log, a.log);
  }
  const auto& last = result.log.back();
  out << "trained " << last.step << " steps, final loss " << format_double(last.loss.total) << "\n";
  return kExitOk;
}

// --- generate -------------------------------------------------------------------

struct GenerateArgs {
  std::string ckpt, seed_file, out;
  std::optional<std::size_t> seed_frames, frames, samples;
  std::optional<double> seed_frac;
  std::optional<std::uint64_t> rng_seed;
  bool deterministic = false;
};

void add_generate(CLI::App& app, GenerateArgs& a) {
  auto* c = app.add_subcommand("generate", "Roll out motion from a checkpoint");
  c->add_option("--ckpt", a.ckpt, "Checkpoint path")->required();
  c->add_option("--seed-file", a.seed_file, "Motion file providing the seed frames")->required();
  auto* sf = c->add_option("--seed-frames", a.seed_frames, "Number of seed frames")->check(CLI::PositiveNumber);
  auto* fr = c->add_option("--seed-frac", a.seed_frac, "Seed with ceil(F * length) frames")
                 ->check(CLI::Range(0.0, 1.0));
  sf->excludes(fr);
  c->add_option("--frames", a.frames, "Frames to generate after the seed")->check(CLI::PositiveNumber);
  c->add_option("--samples", a.samples, "Number of samples")->check(CLI::PositiveNumber);
  c->add_option("--rng-seed", a.rng_seed, "Sampling seed");
  c->add_flag("--deterministic", a.deterministic, "Use posterior means instead of sampling");
  c->add_option("--out", a.out, "Output directory")->required();
}

Model load_model(const fs::path& path, Config* cfg_out = nullptr) {
  Checkpoint ck = checkpoint_load(path);
  const Config cfg = parse_config(ck.config_text);
  if (cfg_out) *cfg_out = cfg;
  return Model(cfg.train.model_config(), std::move(ck.params));
}

int do_generate(const GenerateArgs& a, std::ostream& out, std::ostream& err) {
  Config cfg;
  const Model model = load_model(a.ckpt, &cfg);
  const MotionSequence seed = read_motion_file(a.seed_file);
  const Canonicalized canon = canonicalize(seed);

  RolloutConfig rc = cfg.rollout;
  if (a.seed_frames) rc.seed_frames = *a.seed_frames;
  if (a.seed_frac) rc.seed_frames = seed_frames_for_fraction(*a.seed_frac, seed.frame_count());
  if (a.frames) rc.frames = *a.frames;
  if (a.samples) rc.samples = *a.samples;
  if (a.rng_seed) rc.rng_seed = *a.rng_seed;
  if (a.deterministic) rc.deterministic = true;

  auto samples = generate(model, canon.sequence, rc);
  bool all_ok = true;
  for (std::size_t k = 0; k < samples.size(); ++k) {
    samples[k].motion = apply_transform(samples[k].motion, canon.to_input);
    if (!samples[k].ok) {
      all_ok = false;
      err << "pm: sample " << k << " stopped after " << samples[k].motion.frame_count()
          << " frames: " << samples[k].error << "\n";
    }
  }
  write_rollout(samples, a.out);
  out << "wrote " << samples.size() << " samples to " << a.out << "\n";
  return all_ok ? kExitOk : kExitRuntime;
}

// --- eval -----------------------------------------------------------------------

struct EvalArgs {
  std::string ckpt, data, gt, out, plots;
  std::vector<std::string> gen;
};

void add_eval(CLI::App& app, EvalArgs& a) {
  auto* c = app.add_subcommand("eval", "Score a checkpoint or generated samples");
  auto* ck = c->add_option("--ckpt", a.ckpt, "Checkpoint for representation power");
  auto* data = c->add_option("--data", a.data, "Directory of .pmf sequences for --ckpt");
  auto* gt = c->add_option("--gt", a.gt, "Ground-truth motion for spectral scores");
  auto* gen = c->add_option("--gen", a.gen, "Generated motion files")->expected(1, -1);
  ck->needs(data);
  data->needs(ck);
  gt->needs(gen);
  gen->needs(gt);
  ck->excludes(gt);
  c->add_option("--out", a.out, "Report CSV path (default: standard output)");
  c->add_option("--plots", a.plots, "Directory for per-metric series");
}

std::vector<ReportRow> repr_rows(const EvalArgs& a) {
  Config cfg;
  const Model model = load_model(a.ckpt, &cfg);
  const auto files = motion_files(a.data);
  std::vector<MotionSequence> ds;
  for (const auto& f : files) ds.push_back(canonicalize(read_motion_file(f)).sequence);
  const auto scores = repr_power_eval(model, ds, cfg.train.weights);
  std::vector<ReportRow> rows;
  for (std::size_t i = 0; i < files.size(); ++i) {
    ReportRow r;
    r.sequence = files[i].stem().string();
    r.e_rec = scores[i].e_rec;
    r.e_trec = scores[i].e_trec;
    r.neg_log_p = scores[i].neg_log_p;
    rows.push_back(r);
  }
  return rows;
}

// Spectral scores compare only the generated part of each sample (from its
// .boundary sidecar, when present) against the same frames of the ground truth.
std::vector<ReportRow> spectral_rows(const EvalArgs& a) {
  const MotionSequence gt = read_motion_file(a.gt);
  std::vector<MotionSequence> gens;
  std::size_t first = 0;
  std::vector<ReportRow> rows;
  for (const auto& g : a.gen) {
    MotionSequence m = read_motion_file(g);
    const std::size_t b = boundary_for(g).value_or(0);
    first = std::max(first, b);
    ReportRow r;
    r.sequence = fs::path(g).stem().string();
    const std::size_t start = (b < gt.frame_count() && b < m.frame_count()) ? b : 0;
    const auto s = spectral_compare(m.slice(start, m.frame_count() - start), gt.slice(start, gt.frame_count() - start));
    r.pser = s.pser;
    r.pskld = s.pskld;
    rows.push_back(r);
    gens.push_back(std::move(m));
  }
  if (gens.size() >= 2) {
    ReportRow r;
    r.sequence = "all_samples";
    r.diversity = diversity(gens, first);
    rows.push_back(r);
  }
  return rows;
}

int do_eval(const EvalArgs& a, std::ostream& out) {
  if (a.ckpt.empty() && a.gt.empty()) throw UsageError("eval needs --ckpt with --data, or --gt with --gen");
  const auto rows = a.ckpt.empty() ? spectral_rows(a) : repr_rows(a);
  std::optional<fs::path> plots;
  if (!a.plots.empty()) plots = fs::path(a.plots);
  if (a.out.empty()) {
    out << format_report(rows);
    if (plots) emit_report(rows, *plots / "report.csv", plots);
  } else {
    emit_report(rows, a.out, plots);
    out << "wrote " << a.out << "\n";
  }
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"pm: probabilistic motion synthesis, training, generation and evaluation", "pm"};
  app.require_subcommand(1);
  SynthArgs synth;
  TrainArgs train;
  GenerateArgs gen;
  EvalArgs eval;
  add_synth(app, synth);
  add_train(app, train);
  add_generate(app, gen);
  add_eval(app, eval);

  auto usage = [&](const std::string& why) {
    err << "pm: " << why << "\n";
    const auto subs = app.get_subcommands();
    err << (subs.empty() ? app.help() : subs.front()->help());
    return kExitUsage;
  };

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    const auto subs = app.get_subcommands();
    out << (subs.empty() ? app.help() : subs.front()->help());
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    return usage(e.what());
  }

  try {
    if (app.got_subcommand("synth")) return do_synth(synth, out);
    if (app.got_subcommand("train")) return do_train(train, out);
    if (app.got_subcommand("generate")) return do_generate(gen, out, err);
    return do_eval(eval, out);
  } catch (const UsageError& e) {
    return usage(e.what());
  } catch (const std::exception& e) {
    err << "pm: error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace pmotion::cli
