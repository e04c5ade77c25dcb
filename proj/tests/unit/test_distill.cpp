#include <gtest/gtest.h>

#include "oracles.hpp"
#include "setfit/distill.hpp"
#include "setfit/model_io.hpp"
#include "setfit/synthetic.hpp"

using namespace setfit;

namespace {

struct Fixture {
  Dataset labeled;
  Model teacher;
  std::vector<std::string> unlabeled;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    SyntheticSpec s;
    s.seed = 21;
    const auto pool = generate_synthetic(s);
    auto labeled = sample_few_shot(pool, 16, 1);
    auto teacher = fit(labeled, FitConfig{});
    s.seed = 22;
    s.examples_per_class = 100;
    return Fixture{std::move(labeled), std::move(teacher), generate_synthetic(s).texts()};
  }();
  return f;
}

}  // namespace

TEST(UnlabeledPairs, Examples) {
  EXPECT_TRUE(generate_unlabeled_pairs(10, 0, 1).empty());
  for (const auto& [i, j] : generate_unlabeled_pairs(2, 5, 3)) {
    EXPECT_TRUE((i == 0 && j == 1) || (i == 1 && j == 0));
  }
  EXPECT_EQ(generate_unlabeled_pairs(1000, 200, 4), generate_unlabeled_pairs(1000, 200, 4));
  EXPECT_EQ(generate_unlabeled_pairs(1000, 200, 4).size(), 200u);
  try {
    generate_unlabeled_pairs(1, 3, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewTexts);
  }
}

TEST(TeacherSimilarities, Values) {
  const auto& f = fixture();
  const std::vector<std::string> texts{f.unlabeled[0], f.unlabeled[0], f.unlabeled[1]};
  const std::vector<IndexPair> idx{{0, 1}, {0, 2}, {2, 1}};
  const auto sims = teacher_similarities(f.teacher, texts, idx);
  EXPECT_EQ(sims[0].target, 1.0);
  for (const auto& s : sims) {
    EXPECT_GE(s.target, -1.0);
    EXPECT_LE(s.target, 1.0);
  }
  const auto u = encode(f.teacher.encoder, texts[0]);
  const auto v = encode(f.teacher.encoder, texts[2]);
  EXPECT_LE(std::abs(sims[1].target - oracle::cosine_hp(u.v, v.v)), 1e-12 * std::abs(sims[1].target));
}

TEST(Distill, NoUnlabeledReproducesFit) {
  const auto& f = fixture();
  DistillConfig cfg;
  cfg.master_seed = 13;
  const auto student = distill(f.teacher, f.labeled, {}, cfg);
  const auto plain = fit(f.labeled, cfg.student_fit_config());
  EXPECT_EQ(student.encoder, plain.encoder);
  EXPECT_EQ(student.head, plain.head);
  EXPECT_EQ(serialize_model(student), serialize_model(plain));
  EXPECT_EQ(student.encoder.dim, 32u);
}

TEST(Distill, TeacherUnchangedAndTraceCounts) {
  const auto& f = fixture();
  const auto before = serialize_model(f.teacher);
  DistillConfig cfg;
  cfg.unlabeled_pairs = 50;
  DistillTrace trace;
  const auto student = distill(f.teacher, f.labeled, f.unlabeled, cfg, &trace);
  EXPECT_EQ(serialize_model(f.teacher), before);
  EXPECT_EQ(trace.labeled_pairs, 80u);
  EXPECT_EQ(trace.similarity_pairs, 50u);
  EXPECT_EQ(trace.soft_rows, f.unlabeled.size());
  EXPECT_EQ(student.label_names, f.teacher.label_names);
}

TEST(Distill, Deterministic) {
  const auto& f = fixture();
  DistillConfig cfg;
  cfg.unlabeled_pairs = 30;
  EXPECT_EQ(serialize_model(distill(f.teacher, f.labeled, f.unlabeled, cfg)),
            serialize_model(distill(f.teacher, f.labeled, f.unlabeled, cfg)));
}

TEST(Distill, InvalidAlpha) {
  const auto& f = fixture();
  DistillConfig cfg;
  cfg.alpha = 1.5;
  EXPECT_THROW(distill(f.teacher, f.labeled, f.unlabeled, cfg), Error);
}

TEST(Distill, UnencodableUnlabeledTextNamesStage) {
  const auto& f = fixture();
  const std::vector<std::string> bad{"fine text", "???"};
  DistillConfig cfg;
  cfg.unlabeled_pairs = 4;
  try {
    distill(f.teacher, f.labeled, bad, cfg);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptyInput);
    EXPECT_NE(std::string(e.what()).find("distill"), std::string::npos);
  }
}
