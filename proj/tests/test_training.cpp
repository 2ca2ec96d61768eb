#include <cmath>
#include <limits>

#include <gtest/gtest.h>

#include "kpodnn/training.hpp"

using namespace kpodnn;
using namespace kpodnn::nn;

namespace {

Dataset make_dataset(int rows, const std::function<Eigen::VectorXd(const Eigen::VectorXd&)>& f, int in, int out,
                     std::uint64_t seed = 3) {
  Rng rng(seed);
  Dataset d;
  d.inputs.resize(rows, in);
  d.outputs.resize(rows, out);
  for (int i = 0; i < rows; ++i) {
    for (int k = 0; k < in; ++k) d.inputs(i, k) = rng.uniform();
    d.outputs.row(i) = f(d.inputs.row(i).transpose()).transpose();
  }
  d.normalization = Normalization::identity(in);
  return d;
}

Eigen::VectorXd constant_target(const Eigen::VectorXd&) { return Eigen::Vector2d(1.0, -2.0); }

Eigen::VectorXd linear_target(const Eigen::VectorXd& x) {
  return Eigen::Vector2d(0.5 * x[0] + 0.2 * x[1] + 1.0, -0.3 * x[0] + 0.8);
}

NetworkSpec spec_2_2() { return architecture_for(1, 2); }

}  // namespace

TEST(Train, ConstantTargetLearnedWithin200Epochs) {
  const Dataset d = make_dataset(50, constant_target, 2, 2);
  Network net = init_glorot(spec_2_2(), 1);
  TrainConfig cfg;
  cfg.epochs = 200;
  cfg.seed = 2;
  const auto rep = train(net, d, cfg);
  ASSERT_EQ(rep.train_loss.size(), 200u);
  EXPECT_LT(rep.train_loss.back(), 1e-3);
}

TEST(Train, FixedBatchLossDecreasesOverFirstSteps) {
  const Dataset d = make_dataset(10, linear_target, 2, 2);
  Network net = init_glorot(spec_2_2(), 4);
  TrainConfig cfg;
  cfg.epochs = 5;
  cfg.batch_size = 10;  // one full batch per epoch
  cfg.theta = 0.0;
  const auto rep = train(net, d, cfg);
  EXPECT_LT(rep.train_loss[0], rep.initial_loss);
  for (std::size_t e = 1; e < rep.train_loss.size(); ++e) EXPECT_LT(rep.train_loss[e], rep.train_loss[e - 1]);
}

TEST(Train, SameSeedSameCurveAndParameters) {
  const Dataset d = make_dataset(37, linear_target, 2, 2);
  TrainConfig cfg;
  cfg.epochs = 15;
  cfg.seed = 99;
  Network a = init_glorot(spec_2_2(), 5), b = init_glorot(spec_2_2(), 5);
  const auto ra = train(a, d, cfg);
  const auto rb = train(b, d, cfg);
  EXPECT_EQ(ra.train_loss, rb.train_loss);
  EXPECT_EQ(a.parameters(), b.parameters());

  Network c = init_glorot(spec_2_2(), 5);
  cfg.seed = 100;
  train(c, d, cfg);
  EXPECT_NE(a.parameters(), c.parameters());
}

TEST(Train, ReportShapes) {
  const Dataset d = make_dataset(30, linear_target, 2, 2);
  Network net = init_glorot(spec_2_2(), 6);
  TrainConfig cfg;
  cfg.epochs = 4;
  std::vector<std::size_t> tr, va;
  for (std::size_t i = 0; i < 30; ++i) (i % 5 == 0 ? va : tr).push_back(i);
  int calls = 0;
  const auto rep = train(net, d, tr, va, cfg, [&](int epoch, const Network&) { EXPECT_EQ(epoch, ++calls); });
  EXPECT_EQ(calls, 4);
  EXPECT_EQ(rep.train_loss.size(), 4u);
  EXPECT_EQ(rep.val_loss.size(), 4u);
  EXPECT_EQ(rep.epoch_seconds.size(), 4u);
  EXPECT_EQ(rep.parameter_count, parameter_count(spec_2_2()));
  for (double v : rep.train_loss) EXPECT_TRUE(std::isfinite(v) && v >= 0.0);
}

TEST(Train, AllZeroTargetBatchesAreSkipped) {
  Dataset d = make_dataset(20, linear_target, 2, 2);
  for (int i = 0; i < 20; i += 2) d.outputs.row(i).setZero();
  Network net = init_glorot(spec_2_2(), 7);
  TrainConfig cfg;
  cfg.epochs = 3;
  cfg.batch_size = 1;
  EXPECT_NO_THROW(train(net, d, cfg));
  EXPECT_TRUE(net.parameters().allFinite());
}

TEST(Train, HugeStepDiverges) {
  const Dataset d = make_dataset(20, linear_target, 2, 2);
  Network net = init_glorot(spec_2_2(), 8);
  TrainConfig cfg;
  cfg.epochs = 50;
  cfg.adam.lr = 1e300;
  try {
    train(net, d, cfg);
    FAIL() << "expected Diverged";
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::Diverged);
    EXPECT_TRUE(is_numerical(e.kind()));
  }
}

TEST(Train, StepDecayChangesTrajectory) {
  const Dataset d = make_dataset(30, linear_target, 2, 2);
  TrainConfig cfg;
  cfg.epochs = 6;
  Network a = init_glorot(spec_2_2(), 9), b = init_glorot(spec_2_2(), 9);
  const auto ra = train(a, d, cfg);
  cfg.decay_factor = 0.5;
  cfg.decay_every = 2;
  const auto rb = train(b, d, cfg);
  EXPECT_EQ(ra.train_loss[0], rb.train_loss[0]);
  EXPECT_EQ(ra.train_loss[1], rb.train_loss[1]);
  EXPECT_NE(ra.train_loss[2], rb.train_loss[2]);
}

TEST(Train, RejectsBadInput) {
  const Dataset d = make_dataset(10, linear_target, 2, 2);
  Network net = init_glorot(spec_2_2(), 1);
  TrainConfig cfg;
  cfg.batch_size = 0;
  EXPECT_THROW(train(net, d, cfg), Error);
  cfg = TrainConfig{};
  cfg.adam.beta1 = 1.0;
  EXPECT_THROW(train(net, d, cfg), Error);
  cfg = TrainConfig{};
  cfg.theta = -1.0;
  EXPECT_THROW(train(net, d, cfg), Error);
  Network wrong = init_glorot(architecture_for(2, 2), 1);
  EXPECT_THROW(train(wrong, d, TrainConfig{}), Error);
  EXPECT_THROW(train(net, d, {}, {}, TrainConfig{}), Error);
}

TEST(CrossValidate, TwoFoldsOnFourRows) {
  const Dataset d = make_dataset(4, linear_target, 2, 2);
  TrainConfig cfg;
  cfg.kfold = 2;
  cfg.epochs = 3;
  NetworkSpec deep = spec_2_2();
  deep.hidden_count = 2;
  const auto cv = cross_validate(d, {spec_2_2(), deep}, cfg);
  ASSERT_EQ(cv.generalization_error.size(), 2u);
  for (double e : cv.generalization_error) EXPECT_TRUE(std::isfinite(e) && e > 0.0);
  EXPECT_EQ(cv.generalization_error[cv.best],
            std::min(cv.generalization_error[0], cv.generalization_error[1]));
}

TEST(CrossValidate, ErrorIsFoldMeanScaledByFoldSize) {
  // E_gen = (1 / N_v) * sum_k err_k with N_v = rows / K. Reproduce by hand.
  const Dataset d = make_dataset(20, linear_target, 2, 2);
  TrainConfig cfg;
  cfg.kfold = 4;
  cfg.epochs = 2;
  cfg.seed = 17;
  const auto cv = cross_validate(d, {spec_2_2()}, cfg);

  const FoldPlan plan = kfold_split(d, 4, stage_seed(17, "kfold"));
  double sum = 0.0;
  for (int f = 0; f < 4; ++f) {
    const std::string tag = "cv-0-" + std::to_string(f);
    Network net = init_glorot(spec_2_2(), stage_seed(17, tag + "-init"));
    TrainConfig fc = cfg;
    fc.seed = stage_seed(17, tag + "-shuffle");
    train(net, d, plan.training_rows(f), {}, fc);
    const Dataset val = d.subset(plan.validation_rows(f));
    const Eigen::MatrixXd diff = forward(net, val.inputs) - val.outputs;
    sum += diff.norm() / val.outputs.norm();
  }
  EXPECT_DOUBLE_EQ(cv.generalization_error[0], sum / 5.0);
}

TEST(CrossValidate, NeedsTwoFolds) {
  const Dataset d = make_dataset(10, linear_target, 2, 2);
  TrainConfig cfg;
  cfg.kfold = 1;
  EXPECT_THROW(cross_validate(d, {spec_2_2()}, cfg), Error);
  cfg.kfold = 2;
  EXPECT_THROW(cross_validate(d, {}, cfg), Error);
}
