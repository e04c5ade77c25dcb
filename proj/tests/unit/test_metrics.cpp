#include <gtest/gtest.h>

#include "oracles.hpp"
#include "setfit/metrics.hpp"
#include "setfit/rng.hpp"

using namespace setfit;
using namespace setfit::metrics;
using V = std::vector<std::size_t>;

TEST(Accuracy, Examples) {
  EXPECT_EQ(accuracy(V{0, 1, 2}, V{0, 1, 2}), 1.0);
  EXPECT_EQ(accuracy(V{0, 1, 0, 1}, V{0, 0, 0, 0}), 0.5);
  EXPECT_THROW(accuracy(V{0}, V{0, 1}), Error);
  try {
    accuracy(V{}, V{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Empty);
  }
}

TEST(Mcc, Examples) {
  EXPECT_EQ(mcc(V{0, 1, 1, 0}, V{0, 1, 1, 0}), 1.0);
  EXPECT_EQ(mcc(V{1, 1, 1, 1}, V{0, 1, 1, 0}), 0.0);
  const Confusion c{3, 4, 1, 2};
  EXPECT_NEAR(oracle::mcc_counts(3, 4, 1, 2), 0.4082, 1e-4);
  EXPECT_NEAR(mcc(c), oracle::mcc_counts(3, 4, 1, 2), 1e-15);
  try {
    mcc(V{2, 0}, V{0, 1});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonBinary);
  }
}

TEST(Mcc, AntisymmetricUnderFlip) {
  Rng rng(3);
  for (int t = 0; t < 200; ++t) {
    V p(20), g(20), flipped(20);
    for (std::size_t i = 0; i < 20; ++i) {
      p[i] = uniform_index(rng, 2);
      g[i] = i % 2;
      flipped[i] = 1 - p[i];
    }
    EXPECT_NEAR(mcc(flipped, g), -mcc(p, g), 1e-12);
  }
}

TEST(MaeX100, Examples) {
  EXPECT_EQ(mae_x100(V{1, 2, 3}, V{1, 2, 3}), 0.0);
  EXPECT_EQ(mae_x100(V{1, 2, 3}, V{2, 3, 4}), 100.0);
  EXPECT_EQ(mae_x100(V{4, 0}, V{0, 4}), 400.0);
}

TEST(AveragePrecision, Examples) {
  EXPECT_EQ(average_precision(std::vector<double>{0.9, 0.8, 0.1}, V{1, 1, 0}), 1.0);
  EXPECT_EQ(average_precision(std::vector<double>{0.3}, V{1}), 1.0);
  const std::vector<double> s{0.9, 0.8, 0.7};
  EXPECT_NEAR(oracle::average_precision(s, V{1, 0, 1}), 0.8333, 1e-4);
  EXPECT_NEAR(average_precision(s, V{1, 0, 1}), 5.0 / 6.0, 1e-15);
  try {
    average_precision(s, V{0, 0, 0});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NoPositives);
  }
}

TEST(AveragePrecision, TiesFormOneThreshold) {
  // one tied group holding a positive and a negative: precision 1/2 at recall 1
  EXPECT_DOUBLE_EQ(average_precision(std::vector<double>{0.5, 0.5}, V{0, 1}), 0.5);
  EXPECT_DOUBLE_EQ(average_precision(std::vector<double>{0.5, 0.5}, V{1, 0}), 0.5);
}

TEST(Metrics, PermutationInvariance) {
  Rng rng(8);
  for (int t = 0; t < 100; ++t) {
    V p(15), g(15);
    for (std::size_t i = 0; i < 15; ++i) {
      p[i] = uniform_index(rng, 2);
      g[i] = uniform_index(rng, 2);
    }
    std::vector<std::size_t> perm(15);
    std::iota(perm.begin(), perm.end(), 0);
    shuffle(std::span<std::size_t>(perm), rng);
    V pp(15), gp(15);
    for (std::size_t i = 0; i < 15; ++i) {
      pp[i] = p[perm[i]];
      gp[i] = g[perm[i]];
    }
    EXPECT_EQ(accuracy(p, g), accuracy(pp, gp));
    EXPECT_NEAR(mcc(p, g), mcc(pp, gp), 1e-15);
    EXPECT_EQ(mae_x100(p, g), mae_x100(pp, gp));
  }
}

TEST(Metrics, ParseMetric) {
  EXPECT_EQ(parse_metric("mcc"), Metric::Mcc);
  EXPECT_EQ(to_string(parse_metric("average_precision")), "average_precision");
  EXPECT_THROW(parse_metric("f1"), Error);
}
