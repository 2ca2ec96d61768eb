#include <numbers>

#include <gtest/gtest.h>

#include "kpodnn/config.hpp"

using namespace kpodnn;

TEST(KeyValues, SectionsCommentsAndQuotes) {
  const auto kv = parse_key_values(
      "# top comment\n"
      "[fom]\n"
      "intervals = 128   # trailing\n"
      "\n"
      "[run]\n"
      "output_dir = \"out # not a comment\"\n"
      "[sampling]\n"
      "amplitude = [0.5, 1.0]\n");
  ASSERT_EQ(kv.size(), 3u);
  EXPECT_EQ(kv.at("fom.intervals"), "128");
  EXPECT_EQ(kv.at("run.output_dir"), "\"out # not a comment\"");
  EXPECT_EQ(kv.at("sampling.amplitude"), "[0.5, 1.0]");
}

TEST(KeyValues, RejectsMalformedLines) {
  EXPECT_THROW(parse_key_values("[fom\n"), Error);
  EXPECT_THROW(parse_key_values("[fom]\nintervals 128\n"), Error);
  EXPECT_THROW(read_key_values("/nonexistent/kpodnn.toml"), Error);
}

TEST(Config, WaveDefaults) {
  const Config c;
  EXPECT_DOUBLE_EQ(c.grid.length, 4.0 * std::numbers::pi);
  EXPECT_EQ(c.grid.final_time, 52.0);
  EXPECT_EQ(c.grid.intervals, 256);
  EXPECT_EQ(c.resolved_grid().nodes(), 257);
  EXPECT_EQ(c.resolved_grid().time_steps, 1100);
  EXPECT_EQ(c.stride(), 11);
  EXPECT_EQ(c.method, ReductionMethod::Kpod);
  EXPECT_EQ(c.gamma, 1e-10);
  EXPECT_EQ(c.eps_hat, 1e-12);
  EXPECT_EQ(c.train.batch_size, 10);
  EXPECT_EQ(c.train.adam.lr, 0.01);
  EXPECT_EQ(c.train.theta, 0.01);
  EXPECT_EQ(c.train.kfold, 5);
  EXPECT_TRUE(c.train.adam.amsgrad);
  EXPECT_EQ(c.per_axis, 5);
  const auto centre = c.center_bounds();
  EXPECT_DOUBLE_EQ(centre[0], 4.0 * std::numbers::pi / 3.0);
  EXPECT_DOUBLE_EQ(centre[1], 8.0 * std::numbers::pi / 3.0);
  EXPECT_NO_THROW(c.validate());
}

TEST(Config, StoredIntervalsPickStableMultiple) {
  Config c;
  c.stored_intervals = 24;
  EXPECT_EQ(c.resolved_grid().time_steps, 1080);
  EXPECT_EQ(c.stride(), 45);
  c.grid.time_steps = 1100;
  EXPECT_THROW(c.stride(), Error);
}

TEST(Config, SetParsesEveryKind) {
  Config c;
  c.apply(parse_key_values(
      "[fom]\nintervals = 64\ntime_steps = 300\nspeed = 0.5\nstored_intervals = 10\n"
      "[sampling]\nper_axis = 3\ncenter = [4.0, 8.0]\nwidth_values = [0.5, 0.75, 1.0]\n"
      "test_params = [0.6, 5.0, 0.7, 0.9, 6.0, 0.8]\ninput_scaling = false\n"
      "[reduction]\nmethod = \"pod\"\ngamma = 1e-5\neps_hat = 1e-10\n"
      "[nn]\nepochs = 7\nlr = 0.1\namsgrad = false\ntheta = 0\ndepth_base = e\ncross_validate = true\n"
      "[run]\nseed = 9\nsnapshots = \"a.snap\"\noutput_dir = out\n"));
  EXPECT_EQ(c.grid.intervals, 64);
  EXPECT_EQ(c.grid.time_steps, 300);
  EXPECT_EQ(c.speed, 0.5);
  EXPECT_EQ(c.stride(), 30);
  EXPECT_EQ(c.per_axis, 3);
  EXPECT_EQ(c.center_bounds()[0], 4.0);
  EXPECT_EQ(c.width_values, (std::vector<double>{0.5, 0.75, 1.0}));
  ASSERT_EQ(c.test_params.size(), 2u);
  EXPECT_EQ(c.test_params[1][2], 0.8);
  EXPECT_FALSE(c.input_scaling);
  EXPECT_EQ(c.method, ReductionMethod::Pod);
  EXPECT_EQ(c.gamma, 1e-5);
  EXPECT_EQ(c.train.epochs, 7);
  EXPECT_FALSE(c.train.adam.amsgrad);
  EXPECT_EQ(c.train.theta, 0.0);
  EXPECT_DOUBLE_EQ(c.depth_base, std::numbers::e);
  EXPECT_TRUE(c.cross_validate);
  EXPECT_EQ(c.seed, 9u);
  EXPECT_EQ(c.snapshots, "a.snap");
  EXPECT_EQ(c.output_dir, "out");
}

TEST(Config, BadValuesAreValidationErrors) {
  Config c;
  auto kind_of = [&](const std::string& k, const std::string& v) {
    try {
      c.set(k, v);
    } catch (const Error& e) {
      return e.kind();
    }
    return ErrorKind::Io;
  };
  EXPECT_EQ(kind_of("fom.nodes", "3"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("fom.intervals", "12.5"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("reduction.gamma", "big"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("reduction.method", "pca"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("sampling.width", "[1.0]"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("sampling.test_params", "[1, 2]"), ErrorKind::InvalidArgument);
  EXPECT_EQ(kind_of("nn.amsgrad", "maybe"), ErrorKind::InvalidArgument);
  EXPECT_FALSE(is_numerical(kind_of("fom.intervals", "12.5")));
}

TEST(Config, ValidateCatchesInconsistentSettings) {
  Config c;
  c.gamma = 0.0;
  EXPECT_THROW(c.validate(), Error);
  c = Config{};
  c.train.batch_size = 0;
  EXPECT_THROW(c.validate(), Error);
  c = Config{};
  c.depth_base = 1.0;
  EXPECT_THROW(c.validate(), Error);
  c = Config{};
  c.grid.intervals = 1;
  EXPECT_THROW(c.validate(), Error);
}

TEST(Config, SampleFileMatchesDefaults) {
  Config c;
  c.apply(read_key_values(std::string(KPODNN_SOURCE_DIR) + "/demo/wave.toml"));
  const Config d;
  EXPECT_DOUBLE_EQ(c.grid.length, d.grid.length);
  EXPECT_EQ(c.grid.final_time, d.grid.final_time);
  EXPECT_EQ(c.grid.intervals, d.grid.intervals);
  EXPECT_EQ(c.resolved_grid().time_steps, d.resolved_grid().time_steps);
  EXPECT_EQ(c.speed, d.speed);
  EXPECT_EQ(c.stored_intervals, d.stored_intervals);
  EXPECT_EQ(c.per_axis, d.per_axis);
  EXPECT_EQ(c.amplitude_range, d.amplitude_range);
  EXPECT_EQ(c.center_bounds(), d.center_bounds());
  EXPECT_EQ(c.width_range, d.width_range);
  EXPECT_EQ(c.test_params, d.test_params);
  EXPECT_EQ(c.input_scaling, d.input_scaling);
  EXPECT_EQ(c.method, d.method);
  EXPECT_EQ(c.gamma, d.gamma);
  EXPECT_EQ(c.eps_hat, d.eps_hat);
  EXPECT_EQ(c.train.epochs, d.train.epochs);
  EXPECT_EQ(c.train.batch_size, d.train.batch_size);
  EXPECT_EQ(c.train.adam.lr, d.train.adam.lr);
  EXPECT_EQ(c.train.theta, d.train.theta);
  EXPECT_EQ(c.train.adam.amsgrad, d.train.adam.amsgrad);
  EXPECT_EQ(c.train.kfold, d.train.kfold);
  EXPECT_EQ(c.depth_base, d.depth_base);
  EXPECT_EQ(c.cross_validate, d.cross_validate);
  EXPECT_EQ(c.seed, d.seed);
  EXPECT_EQ(c.output_dir, "out");
}
