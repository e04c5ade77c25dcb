#include <gtest/gtest.h>

#include "setfit/cost.hpp"
#include "setfit/harness.hpp"

using namespace setfit;
using namespace setfit::cost;

namespace {

const CostSpec kTFew{3e9, 54, Arch::EncoderDecoder, 1000, 8};
const CostSpec kMpnet{110e6, 38, Arch::EncoderOnly, 1000, 8};
const CostSpec kMiniLm{15e6, 38, Arch::EncoderOnly, 1000, 8};

}  // namespace

TEST(Cost, InferenceFlops) {
  EXPECT_DOUBLE_EQ(inference_flops(kMpnet), 8.36e9);
  EXPECT_DOUBLE_EQ(inference_flops(kTFew), 1.62e11);
  EXPECT_EQ(inference_flops(CostSpec{1, 1, Arch::EncoderOnly, 1, 1}), 2.0);
}

TEST(Cost, TrainingFlops) {
  EXPECT_DOUBLE_EQ(training_flops(kMpnet), 2.0064e14);
  EXPECT_DOUBLE_EQ(training_flops(kTFew), 3.888e15);
  auto bad = kMpnet;
  bad.n_steps = 0;
  try {
    training_flops(bad);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
  }
}

TEST(Cost, Speedups) {
  EXPECT_NEAR(speedup(kTFew, kMpnet), 19.378, 1e-3);
  EXPECT_EQ(speedup(kMpnet, kMpnet), 1.0);
  EXPECT_EQ(std::round(1.6e11 / 1.3e9), 123.0);
  EXPECT_DOUBLE_EQ(speedup(kTFew, kMpnet), training_speedup(kTFew, kMpnet));
}

TEST(Cost, MiniLmRowComputedFromParameterCount) {
  EXPECT_DOUBLE_EQ(inference_flops(kMiniLm), 1.14e9);
  EXPECT_DOUBLE_EQ(training_flops(kMiniLm), 2.736e13);
  EXPECT_NE(round_sig(inference_flops(kMiniLm), 2), 1.3e9);
}

TEST(Cost, Linearity) {
  auto twice_n = kMpnet;
  twice_n.n_params *= 2;
  auto twice_l = kMpnet;
  twice_l.seq_len *= 2;
  EXPECT_EQ(inference_flops(twice_n), 2 * inference_flops(kMpnet));
  EXPECT_EQ(training_flops(twice_l), 2 * training_flops(kMpnet));
  auto encdec = kMpnet;
  encdec.arch = Arch::EncoderDecoder;
  EXPECT_EQ(inference_flops(encdec), 0.5 * inference_flops(kMpnet));
  EXPECT_EQ(training_flops(encdec), 0.5 * training_flops(kMpnet));
  EXPECT_EQ(speedup(twice_n, kMpnet), 2.0);
}

TEST(Cost, RoundSig) {
  EXPECT_EQ(round_sig(1.62e11, 2), 1.6e11);
  EXPECT_EQ(round_sig(3.888e15, 2), 3.9e15);
  EXPECT_EQ(round_sig(2.0064e14, 2), 2.0e14);
  EXPECT_EQ(round_sig(8.36e9, 2), 8.4e9);
  EXPECT_EQ(round_sig(19.378, 2), 19.0);
}

TEST(CostReport, Table5Rows) {
  const auto rows = parse_cost_spec(R"({"rows": [
    {"name": "T-Few 3B", "n_params": 3e9, "seq_len": 54, "arch": "encoder_decoder", "reported_inference_flops": 1.6e11},
    {"name": "MPNet", "n_params": 110e6, "seq_len": 38, "reported_inference_flops": 8.3e9},
    {"name": "MiniLM", "n_params": 15e6, "seq_len": 38, "reported_inference_flops": 1.3e9,
     "reported_training_flops": 3.2e13}
  ]})");
  const auto table = run_cost_report(rows);
  ASSERT_EQ(table.size(), 3u);
  EXPECT_EQ(table[0].speedup, 1.0);
  EXPECT_EQ(std::round(table[1].speedup), 19.0);
  EXPECT_EQ(std::round(*table[2].reported_speedup), 123.0);
  EXPECT_FALSE(table[2].consistent);
  EXPECT_NE(cost_table_text(table).find("MiniLM"), std::string::npos);
}

TEST(CostReport, SingleRow) {
  const auto table = run_cost_report(parse_cost_spec(R"([{"name": "a", "n_params": 10, "seq_len": 2}])"));
  ASSERT_EQ(table.size(), 1u);
  EXPECT_EQ(table[0].speedup, 1.0);
}

TEST(CostReport, ParseErrorsCarryLineNumbers) {
  try {
    parse_cost_spec("{\n  \"rows\": [\n    {\"n_params\": 1,,}\n  ]\n}");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InvalidSpec);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
  try {
    parse_cost_spec(R"([{"name": "a", "n_params": 10, "seq_len": 2}, {"name": "b", "seq_len": 2}])");
    FAIL();
  } catch (const Error& e) {
    EXPECT_NE(std::string(e.what()).find("row 1"), std::string::npos);
  }
}
