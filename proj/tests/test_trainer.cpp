#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "pmotion/canonical.hpp"
#include "pmotion/checkpoint.hpp"
#include "pmotion/synth.hpp"
#include "pmotion/trainer.hpp"

using namespace pmotion;

namespace {

TrainConfig small_config() {
  TrainConfig c;
  c.joints = 2;
  c.hidden = 8;
  c.latent = 4;
  c.window = 12;
  c.stride = 6;
  c.steps = 30;
  c.seed = 5;
  return c;
}

std::vector<MotionSequence> small_dataset(std::size_t joints = 2) {
  SynthRanges r;
  auto ds = synth_dataset(3, joints, 30, 60, r, 9);
  for (auto& s : ds) s = canonicalize(s).sequence;
  return ds;
}

MotionSequence blank(std::size_t frames) { return MotionSequence(30, 1, std::vector<double>(frames * 9, 0.0)); }

TEST(MakeWindows, Arithmetic) {
  const auto w = make_windows(blank(100), 64, 32);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].start, 0u);
  EXPECT_EQ(w[1].start, 32u);
  EXPECT_EQ(make_windows(blank(64), 64, 32).size(), 1u);
  EXPECT_TRUE(make_windows(blank(63), 64, 32).empty());
  EXPECT_THROW(make_windows(std::vector<MotionSequence>{blank(63), blank(10)}, 64, 32), EmptyDataset);
  EXPECT_THROW(make_windows(blank(10), 2, 1), DomainError);
}

TEST(MakeWindows, DatasetIndexing) {
  const auto w = make_windows(std::vector<MotionSequence>{blank(70), blank(10), blank(64)}, 64, 32);
  ASSERT_EQ(w.size(), 2u);
  EXPECT_EQ(w[0].sequence, 0u);
  EXPECT_EQ(w[1].sequence, 2u);
}

TEST(ClipGlobalNorm, ScalesToBound) {
  std::vector<ad::Tensor> g{ad::Tensor::vector({3.0, 0.0}), ad::Tensor::vector({4.0})};
  EXPECT_DOUBLE_EQ(clip_global_norm(g, 1.0), 5.0);
  double sq = 0.0;
  for (const auto& t : g)
    for (double v : t.data()) sq += v * v;
  EXPECT_LE(std::sqrt(sq), 1.0 + 1e-12);
  std::vector<ad::Tensor> small{ad::Tensor::vector({0.1})};
  clip_global_norm(small, 1.0);
  EXPECT_EQ(small[0][0], 0.1);
}

TEST(TrainConfig, Validation) {
  TrainConfig c;
  EXPECT_NO_THROW(c.validate());
  c.window = 2;
  EXPECT_THROW(c.validate(), DomainError);
  c = TrainConfig{};
  c.alpha = 1.0;
  EXPECT_THROW(c.validate(), DomainError);
  c = TrainConfig{};
  c.clip_norm = 0.0;
  EXPECT_THROW(c.validate(), DomainError);
}

TEST(TrainRun, ZeroLearningRateKeepsInitialParameters) {
  TrainConfig c = small_config();
  c.lr = 0.0;
  c.steps = 5;
  const auto r = train_run(c, small_dataset());
  EXPECT_EQ(r.model.params(), Model(c.model_config(), mix64(c.seed)).params());
  EXPECT_EQ(r.log.size(), 5u);
}

TEST(TrainRun, Deterministic) {
  const auto ds = small_dataset();
  const auto a = train_run(small_config(), ds);
  const auto b = train_run(small_config(), ds);
  EXPECT_EQ(a.model.params(), b.model.params());
  ASSERT_EQ(a.log.size(), b.log.size());
  for (std::size_t i = 0; i < a.log.size(); ++i) {
    EXPECT_EQ(a.log[i].loss.total, b.log[i].loss.total);
    EXPECT_EQ(a.log[i].mean_phi, b.log[i].mean_phi);
  }
  const Checkpoint ca{"x", a.model.params(), a.optimizer};
  const Checkpoint cb{"x", b.model.params(), b.optimizer};
  EXPECT_EQ(encode_checkpoint(ca), encode_checkpoint(cb));
  TrainConfig other = small_config();
  other.seed = 6;
  EXPECT_NE(train_run(other, ds).model.params(), a.model.params());
}

TEST(TrainRun, LogInvariants) {
  const auto r = train_run(small_config(), small_dataset());
  for (std::size_t i = 0; i < r.log.size(); ++i) {
    const auto& rec = r.log[i];
    EXPECT_EQ(rec.step, i + 1);
    EXPECT_GE(rec.loss.recon_frame, 0.0);
    EXPECT_GE(rec.loss.recon_timediff, 0.0);
    EXPECT_GE(rec.loss.kl_translation_stream, 0.0);
    EXPECT_GE(rec.loss.kl_pose_stream, 0.0);
    EXPECT_GE(rec.mean_phi, 0.0);
    const auto expect = total_loss(rec.loss.recon_frame, rec.loss.recon_timediff, rec.loss.kl_translation_stream,
                                   rec.loss.kl_pose_stream, 0.0, LossWeights{});
    EXPECT_NEAR(rec.loss.total, expect.total, 1e-12);
    if (i > 0) {
      EXPECT_GE(rec.seconds, r.log[i - 1].seconds);
    }
  }
  EXPECT_EQ(r.optimizer.step, 30u);
}

TEST(TrainRun, LossDecreasesOnSmallRun) {
  TrainConfig c = small_config();
  c.steps = 300;
  const auto r = train_run(c, small_dataset());
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 20; ++i) {
    first += r.log[i].loss.total;
    last += r.log[r.log.size() - 1 - i].loss.total;
  }
  EXPECT_LT(last, 0.8 * first);
}

TEST(TrainRun, AllModelKindsAndCells) {
  const auto ds = small_dataset();
  for (ModelKind kind : {ModelKind::TwoStream, ModelKind::Vq, ModelKind::Q}) {
    for (CellKind cell : {CellKind::Gru, CellKind::Lstm}) {
      TrainConfig c = small_config();
      c.model = kind;
      c.cell = cell;
      c.steps = 3;
      const auto r = train_run(c, ds);
      ASSERT_EQ(r.log.size(), 3u);
      if (kind == ModelKind::Q) {
        // Deterministic and trained without the KL term.
        const auto& l = r.log[0].loss;
        EXPECT_NEAR(l.total, l.recon_frame + 5.0 * l.recon_timediff, 1e-12);
      }
    }
  }
}

TEST(TrainRun, PosePriorContributes) {
  TrainConfig c = small_config();
  c.steps = 2;
  c.pose_prior = "squared_norm";
  const auto r = train_run(c, small_dataset());
  const auto& l = r.log[0].loss;
  EXPECT_GT(l.pose_prior, 0.0);
  EXPECT_NEAR(l.total - l.neg_log_p, 1e-4 * l.pose_prior, 1e-12);
}

TEST(TrainRun, CheckpointHook) {
  TrainConfig c = small_config();
  c.steps = 10;
  c.checkpoint_every = 4;
  std::vector<std::size_t> at;
  TrainHooks h;
  h.on_checkpoint = [&](std::size_t step, const Model&, const ad::AdamState& s) {
    EXPECT_EQ(s.step, step);
    at.push_back(step);
  };
  train_run(c, small_dataset(), h);
  EXPECT_EQ(at, (std::vector<std::size_t>{4, 8, 10}));
}

TEST(TrainRun, Errors) {
  EXPECT_THROW(train_run(small_config(), small_dataset(3)), ShapeMismatch);
  EXPECT_THROW(train_run(small_config(), {}), EmptyDataset);
}

TEST(TrainRun, NumericFaultNamesStep) {
  auto ds = small_dataset();
  std::vector<double> v = ds[0].values();
  for (double& x : v) x *= 1e200;  // squares overflow in the KL / prior path
  std::vector<MotionSequence> bad{MotionSequence(30, 2, v)};
  TrainConfig c = small_config();
  c.pose_prior = "squared_norm";
  try {
    train_run(c, bad);
    FAIL() << "expected NumericFault";
  } catch (const NumericFault& e) {
    EXPECT_NE(std::string(e.what()).find("training step 1"), std::string::npos) << e.what();
  }
}

TEST(TrainLog, CsvFormat) {
  EXPECT_EQ(train_log_header(), "step,recon_frame,recon_timediff,kl_t,kl_p,prior,total,mean_phi,seconds");
  TrainLogRecord r;
  r.step = 3;
  r.loss.recon_frame = 0.5;
  r.loss.total = 1.25;
  r.mean_phi = 1e-5;
  r.seconds = 2;
  EXPECT_EQ(format_train_log_row(r), "3,0.5,0,0,0,0,1.25,1e-05,2");
  const auto path = std::filesystem::temp_directory_path() / "pm_trainlog_test" / "log.csv";
  write_train_log({r, r}, path);
  std::ifstream in(path);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) ++n;
  EXPECT_EQ(n, 3);
  std::filesystem::remove_all(path.parent_path());
}

}  // namespace
