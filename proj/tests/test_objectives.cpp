#include "gg/objectives.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>

#include "gg/error.hpp"
#include "gg/rng.hpp"

using gg::BatchSampler;
using gg::Dataset;
using gg::gen_synthetic;
using gg::load_dataset;
using gg::QuadraticObjective;
using gg::softmax_loss;
using gg::softmax_loss_grad;
using gg::SoftmaxObjective;

namespace {

std::string write_temp(const std::string& name, const std::string& contents) {
  std::string path = ::testing::TempDir() + name;
  std::ofstream out(path, std::ios::binary);
  out << contents;
  return path;
}

// Central finite differences with per-coordinate step 1e-5 * (1 + |x_i|).
std::vector<double> fd_gradient(const gg::Objective& objective, std::vector<double> params,
                                std::span<const int> batch) {
  std::vector<double> fd(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    double h = 1e-5 * (1.0 + std::abs(params[i]));
    double orig = params[i];
    params[i] = orig + h;
    double up = objective.loss(params, batch);
    params[i] = orig - h;
    double down = objective.loss(params, batch);
    params[i] = orig;
    fd[i] = (up - down) / (2.0 * h);
  }
  return fd;
}

void expect_gradient_matches_fd(const gg::Objective& objective, std::span<const int> batch,
                                std::uint64_t seed) {
  gg::Rng rng(seed);
  for (int probe = 0; probe < 10; ++probe) {
    std::vector<double> params(objective.dimension());
    for (double& x : params) x = rng.normal();
    std::vector<double> analytic = objective.gradient(params, batch);
    std::vector<double> numeric = fd_gradient(objective, params, batch);
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      num += (analytic[i] - numeric[i]) * (analytic[i] - numeric[i]);
      den += numeric[i] * numeric[i];
    }
    EXPECT_LE(std::sqrt(num), 1e-5 * std::max(1.0, std::sqrt(den))) << "probe " << probe;
  }
}

}  // namespace

TEST(QuadraticTest, DiagonalExample) {
  QuadraticObjective objective(std::vector<double>{2.0, 4.0});
  std::vector<double> theta{1.0, 1.0};
  std::vector<double> grad = objective.gradient(theta, {});
  EXPECT_DOUBLE_EQ(objective.loss(theta, {}), 3.0);
  EXPECT_DOUBLE_EQ(grad[0], 2.0);
  EXPECT_DOUBLE_EQ(grad[1], 4.0);
}

TEST(QuadraticTest, OriginIsOptimum) {
  QuadraticObjective objective(std::vector<double>{2.0, 4.0});
  std::vector<double> zero{0.0, 0.0};
  EXPECT_DOUBLE_EQ(objective.loss(zero, {}), 0.0);
  std::vector<double> grad = objective.gradient(zero, {});
  EXPECT_DOUBLE_EQ(grad[0], 0.0);
  EXPECT_DOUBLE_EQ(grad[1], 0.0);
}

TEST(QuadraticTest, IdentityMatrix) {
  QuadraticObjective objective = QuadraticObjective::isotropic(2, 1.0);
  std::vector<double> theta{3.0, 4.0};
  EXPECT_DOUBLE_EQ(objective.loss(theta, {}), 12.5);
  std::vector<double> grad = objective.gradient(theta, {});
  EXPECT_DOUBLE_EQ(grad[0], 3.0);
  EXPECT_DOUBLE_EQ(grad[1], 4.0);
}

TEST(QuadraticTest, IsotropicGradientIsExactlyScaledParams) {
  QuadraticObjective objective = QuadraticObjective::isotropic(7, 3.5);
  gg::Rng rng(2);
  std::vector<double> theta(7);
  for (double& x : theta) x = rng.normal();
  std::vector<double> grad = objective.gradient(theta, {});
  for (std::size_t i = 0; i < 7; ++i) {
    EXPECT_DOUBLE_EQ(grad[i], 3.5 * theta[i]);
  }
}

TEST(QuadraticTest, LengthMismatchThrows) {
  QuadraticObjective objective(std::vector<double>{1.0, 2.0});
  std::vector<double> bad{1.0, 2.0, 3.0};
  EXPECT_THROW(objective.loss(bad, {}), gg::DimensionError);
}

TEST(QuadraticTest, DenseFormMatchesFiniteDifferences) {
  gg::DenseMatrix a{{2.0, 0.5, 0.0}, {0.5, 3.0, -0.25}, {0.0, -0.25, 1.5}};
  QuadraticObjective objective(a);
  expect_gradient_matches_fd(objective, {}, 40);
}

TEST(QuadraticTest, DenseFormRejectsNonPsd) {
  gg::DenseMatrix indefinite{{1.0, 0.0}, {0.0, -2.0}};
  EXPECT_THROW(QuadraticObjective{indefinite}, gg::NumericError);
}

TEST(QuadraticTest, ConditionNumberSpectrum) {
  QuadraticObjective objective = QuadraticObjective::with_condition_number(10, 4.0);
  EXPECT_NEAR(objective.condition_number(), 4.0, 1e-12);
}

TEST(SoftmaxTest, ZeroWeightsGiveLogC) {
  Dataset data = gen_synthetic(50, 4, 3, 99);
  std::vector<double> weights(3 * 4, 0.0);
  std::vector<int> batch{0, 1, 2, 3, 4};
  EXPECT_NEAR(softmax_loss(data, weights, batch), std::log(3.0), 1e-12);
}

TEST(SoftmaxTest, ZeroWeightsBinaryGradientBlocks) {
  // One sample, label 0, both class probabilities 0.5: the gradient block for
  // class 0 is -x/2 and for class 1 is +x/2.
  Dataset data;
  data.num_samples = 1;
  data.num_features = 3;
  data.num_classes = 2;
  data.features = {0.5, -1.0, 2.0};
  data.labels = {0};
  std::vector<double> weights(6, 0.0);
  std::vector<double> grad(6, 0.0);
  std::vector<int> batch{0};
  softmax_loss_grad(data, weights, batch, grad);
  for (std::size_t j = 0; j < 3; ++j) {
    EXPECT_NEAR(grad[j], -0.5 * data.features[j], 1e-14);
    EXPECT_NEAR(grad[3 + j], 0.5 * data.features[j], 1e-14);
  }
}

TEST(SoftmaxTest, ThreeClassWorkedExample) {
  // x=(1,0), label 2, rows (0,0),(0,0),(1,0): logits are (0,0,1). The scalar
  // oracle below evaluates the softmax directly.
  Dataset data;
  data.num_samples = 1;
  data.num_features = 2;
  data.num_classes = 3;
  data.features = {1.0, 0.0};
  data.labels = {2};
  std::vector<double> weights{0, 0, 0, 0, 1, 0};
  std::vector<int> batch{0};

  double denom = std::exp(0.0) + std::exp(0.0) + std::exp(1.0);
  double expected = -std::log(std::exp(1.0) / denom);
  EXPECT_NEAR(expected, 0.55144471393205108, 1e-15);
  EXPECT_NEAR(softmax_loss(data, weights, batch), expected, 1e-14);
}

TEST(SoftmaxTest, EmptyBatchRejected) {
  Dataset data = gen_synthetic(10, 2, 2, 1);
  std::vector<double> weights(4, 0.0);
  EXPECT_THROW(softmax_loss(data, weights, {}), gg::DimensionError);
}

TEST(SoftmaxTest, GradientMatchesFiniteDifferences) {
  auto data = std::make_shared<Dataset>(gen_synthetic(30, 5, 4, 7).with_bias_column());
  SoftmaxObjective objective(data);
  std::vector<int> batch{0, 3, 7, 11, 19, 22};
  expect_gradient_matches_fd(objective, batch, 41);
}

TEST(SoftmaxTest, ConvexAlongRandomChords) {
  auto data = std::make_shared<Dataset>(gen_synthetic(40, 4, 3, 13));
  SoftmaxObjective objective(data);
  std::vector<int> batch{0, 5, 10, 15, 20};
  gg::Rng rng(17);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> a(objective.dimension()), b(objective.dimension());
    for (double& x : a) x = rng.normal();
    for (double& x : b) x = rng.normal();
    double loss_a = objective.loss(a, batch);
    double loss_b = objective.loss(b, batch);
    for (double t : {0.25, 0.5, 0.75}) {
      std::vector<double> mix(objective.dimension());
      for (std::size_t i = 0; i < mix.size(); ++i) mix[i] = t * a[i] + (1.0 - t) * b[i];
      EXPECT_LE(objective.loss(mix, batch), t * loss_a + (1.0 - t) * loss_b + 1e-10);
    }
  }
}

TEST(GenSyntheticTest, ShapeContract) {
  Dataset data = gen_synthetic(100, 5, 3, 42);
  EXPECT_EQ(data.num_samples, 100u);
  EXPECT_EQ(data.num_features, 5u);
  EXPECT_EQ(data.num_classes, 3u);
  EXPECT_EQ(data.features.size(), 500u);
  for (int label : data.labels) {
    EXPECT_GE(label, 0);
    EXPECT_LT(label, 3);
  }
}

TEST(GenSyntheticTest, DeterministicGivenSeed) {
  Dataset a = gen_synthetic(64, 6, 4, 9001);
  Dataset b = gen_synthetic(64, 6, 4, 9001);
  EXPECT_EQ(a.features, b.features);
  EXPECT_EQ(a.labels, b.labels);
  Dataset c = gen_synthetic(64, 6, 4, 9002);
  EXPECT_NE(a.features, c.features);
}

TEST(GenSyntheticTest, SingleClassRejected) {
  EXPECT_THROW(gen_synthetic(10, 2, 1, 0), gg::DimensionError);
}

TEST(GenSyntheticTest, ApproximatelyBalanced) {
  Dataset data = gen_synthetic(100, 3, 3, 5);
  std::vector<int> counts(3, 0);
  for (int label : data.labels) counts[static_cast<std::size_t>(label)]++;
  for (int c : counts) {
    EXPECT_GE(c, 33);
    EXPECT_LE(c, 34);
  }
}

TEST(LoadDatasetTest, CsvBasic) {
  std::string path = write_temp("basic.csv", "1,0.5,2.0\n0,1.0,-1.0\n");
  Dataset data = load_dataset(path, gg::DataFormat::kCsv);
  EXPECT_EQ(data.num_samples, 2u);
  EXPECT_EQ(data.num_features, 2u);
  EXPECT_EQ(data.num_classes, 2u);
  EXPECT_DOUBLE_EQ(data.feature(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(data.feature(1, 1), -1.0);
  EXPECT_EQ(data.labels[0], 1);
  EXPECT_EQ(data.labels[1], 0);
}

TEST(LoadDatasetTest, CsvCrlfAccepted) {
  std::string path = write_temp("crlf.csv", "1,0.5,2.0\r\n0,1.0,-1.0\r\n");
  Dataset data = load_dataset(path, gg::DataFormat::kCsv);
  EXPECT_EQ(data.num_samples, 2u);
  EXPECT_DOUBLE_EQ(data.feature(0, 1), 2.0);
}

TEST(LoadDatasetTest, CsvClassCountFromMaxLabel) {
  std::string path = write_temp("labels.csv", "1,0.0\n7,1.0\n2,2.0\n");
  Dataset data = load_dataset(path, gg::DataFormat::kCsv);
  EXPECT_EQ(data.num_classes, 8u);
}

TEST(LoadDatasetTest, CsvMalformedFieldReportsLine) {
  std::string path = write_temp("bad.csv", "1,0.5\n0,oops\n");
  try {
    load_dataset(path, gg::DataFormat::kCsv);
    FAIL() << "expected ParseError";
  } catch (const gg::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadDatasetTest, CsvInconsistentColumnsRejected) {
  std::string path = write_temp("ragged.csv", "1,0.5,1.0\n0,1.0\n");
  EXPECT_THROW(load_dataset(path, gg::DataFormat::kCsv), gg::ParseError);
}

TEST(LoadDatasetTest, LibsvmDensifies) {
  std::string path = write_temp("basic.svm", "0 1:0.5 3:2.0\n");
  Dataset data = load_dataset(path, gg::DataFormat::kLibsvm);
  EXPECT_EQ(data.num_samples, 1u);
  EXPECT_EQ(data.num_features, 3u);
  EXPECT_DOUBLE_EQ(data.feature(0, 0), 0.5);
  EXPECT_DOUBLE_EQ(data.feature(0, 1), 0.0);
  EXPECT_DOUBLE_EQ(data.feature(0, 2), 2.0);
}

TEST(LoadDatasetTest, LibsvmMalformedPairRejected) {
  std::string path = write_temp("bad.svm", "0 1:0.5\n1 nope\n");
  try {
    load_dataset(path, gg::DataFormat::kLibsvm);
    FAIL() << "expected ParseError";
  } catch (const gg::ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
  }
}

TEST(LoadDatasetTest, MissingFileThrows) {
  EXPECT_THROW(load_dataset("/nonexistent/nope.csv", gg::DataFormat::kCsv), std::runtime_error);
}

TEST(DatasetTest, BiasColumnAppended) {
  Dataset data = gen_synthetic(10, 3, 2, 77);
  Dataset with_bias = data.with_bias_column();
  EXPECT_EQ(with_bias.num_features, 4u);
  for (std::size_t i = 0; i < 10; ++i) {
    EXPECT_DOUBLE_EQ(with_bias.feature(i, 3), 1.0);
    for (std::size_t j = 0; j < 3; ++j) {
      EXPECT_DOUBLE_EQ(with_bias.feature(i, j), data.feature(i, j));
    }
  }
}

TEST(BatchSamplerTest, PartitionOfSmallSet) {
  BatchSampler sampler(4, 2, 123);
  std::vector<int> first = sampler.next();
  std::vector<int> second = sampler.next();
  EXPECT_EQ(first.size(), 2u);
  EXPECT_EQ(second.size(), 2u);
  std::set<int> seen(first.begin(), first.end());
  seen.insert(second.begin(), second.end());
  EXPECT_EQ(seen, (std::set<int>{0, 1, 2, 3}));
}

TEST(BatchSamplerTest, ShortFinalBatch) {
  BatchSampler sampler(5, 2, 7);
  EXPECT_EQ(sampler.next().size(), 2u);
  EXPECT_EQ(sampler.next().size(), 2u);
  EXPECT_EQ(sampler.next().size(), 1u);
  // Next epoch starts full again.
  EXPECT_EQ(sampler.next().size(), 2u);
}

TEST(BatchSamplerTest, DeterministicGivenSeed) {
  BatchSampler a(50, 8, 99);
  BatchSampler b(50, 8, 99);
  for (int i = 0; i < 20; ++i) {
    EXPECT_EQ(a.next(), b.next());
  }
}

TEST(BatchSamplerTest, EpochCoverage) {
  BatchSampler sampler(17, 5, 31);
  for (int epoch = 0; epoch < 3; ++epoch) {
    std::vector<int> counts(17, 0);
    std::size_t drawn = 0;
    while (drawn < 17) {
      for (int idx : sampler.next()) {
        counts[static_cast<std::size_t>(idx)]++;
        ++drawn;
      }
    }
    for (int c : counts) EXPECT_EQ(c, 1) << "epoch " << epoch;
  }
}

TEST(BatchSamplerTest, EpochsReshuffle) {
  BatchSampler sampler(64, 64, 5);
  std::vector<int> first_epoch = sampler.next();
  std::vector<int> second_epoch = sampler.next();
  EXPECT_NE(first_epoch, second_epoch);
}

TEST(BatchSamplerTest, OversizedBatchRejected) {
  EXPECT_THROW(BatchSampler(4, 5, 0), gg::DimensionError);
  EXPECT_THROW(BatchSampler(4, 0, 0), gg::DimensionError);
}
