#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "setfit/corpus.hpp"
#include "setfit/synthetic.hpp"

using namespace setfit;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const auto path = std::filesystem::temp_directory_path() / ("setfit_corpus_" + name);
  std::ofstream(path, std::ios::binary) << content;
  return path;
}

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an error";
  return ErrorCode::InvalidArgument;
}

Dataset balanced(std::size_t per_class, std::size_t classes) {
  std::vector<LabeledExample> ex;
  std::vector<std::string> names;
  for (std::size_t c = 0; c < classes; ++c) names.push_back("c" + std::to_string(c));
  for (std::size_t i = 0; i < per_class * classes; ++i) ex.push_back({"text " + std::to_string(i), i % classes});
  return Dataset(std::move(ex), names);
}

}  // namespace

TEST(LoadDataset, JsonlStringLabels) {
  const auto path = write_temp("a.jsonl", "{\"text\":\"a\",\"label\":\"pos\"}\n{\"text\":\"b\",\"label\":\"neg\"}\n");
  const auto d = load_dataset(path, DatasetFormat::Jsonl);
  ASSERT_EQ(d.size(), 2u);
  EXPECT_EQ(d.label_names(), (std::vector<std::string>{"pos", "neg"}));
  EXPECT_EQ(d.examples()[0], (LabeledExample{"a", 0}));
  EXPECT_EQ(d.examples()[1], (LabeledExample{"b", 1}));
}

TEST(LoadDataset, DeclaredNamesFixTheOrder) {
  const auto path = write_temp("b.jsonl", "{\"text\":\"a\",\"label\":\"pos\"}\n{\"text\":\"b\",\"label\":\"neg\"}\n");
  const auto d = load_dataset(path, std::vector<std::string>{"neg", "pos"});
  EXPECT_EQ(d.label_names(), (std::vector<std::string>{"neg", "pos"}));
  EXPECT_EQ(d.examples()[0].label, 1u);
  EXPECT_EQ(d.examples()[1].label, 0u);
}

TEST(LoadDataset, EmptyFile) {
  const auto path = write_temp("empty.jsonl", "");
  EXPECT_EQ(code_of([&] { load_dataset(path, DatasetFormat::Jsonl); }), ErrorCode::EmptyDataset);
}

TEST(LoadDataset, IndexBeyondDeclaredNames) {
  const auto content = std::string("{\"text\":\"a\",\"label\":0}\n{\"text\":\"b\",\"label\":5}\n");
  EXPECT_EQ(code_of([&] {
              parse_dataset(content, DatasetFormat::Jsonl, std::vector<std::string>{"neg", "pos"});
            }),
            ErrorCode::LabelOutOfRange);
}

TEST(LoadDataset, MissingFile) {
  EXPECT_EQ(code_of([] { load_dataset("/nonexistent/file.jsonl", DatasetFormat::Jsonl); }), ErrorCode::FileNotFound);
}

TEST(LoadDataset, MalformedRecordReportsLine) {
  const auto content = std::string("{\"text\":\"a\",\"label\":\"x\"}\n{\"text\":\"b\"}\n");
  try {
    parse_dataset(content, DatasetFormat::Jsonl);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos);
  }
}

TEST(LoadDataset, BlankTextRejected) {
  EXPECT_EQ(code_of([] { parse_dataset("{\"text\":\"   \",\"label\":\"x\"}\n", DatasetFormat::Jsonl); }),
            ErrorCode::MalformedRecord);
}

TEST(LoadDataset, IntegerLabelsWithoutNames) {
  const auto d = parse_dataset("{\"text\":\"a\",\"label\":2}\n{\"text\":\"b\",\"label\":0}\n", DatasetFormat::Jsonl);
  EXPECT_EQ(d.label_names(), (std::vector<std::string>{"0", "1", "2"}));
  EXPECT_EQ(d.examples()[0].label, 2u);
}

TEST(LoadDataset, CsvWithQuoting) {
  const std::string content =
      "text,label\n"
      "\"hello, world\",pos\n"
      "\"she said \"\"hi\"\"\",neg\n"
      "\"two\nlines\",pos\n";
  const auto d = parse_dataset(content, DatasetFormat::Csv);
  ASSERT_EQ(d.size(), 3u);
  EXPECT_EQ(d.examples()[0].text, "hello, world");
  EXPECT_EQ(d.examples()[1].text, "she said \"hi\"");
  EXPECT_EQ(d.examples()[2].text, "two\nlines");
  EXPECT_EQ(d.label_names(), (std::vector<std::string>{"pos", "neg"}));
}

TEST(LoadDataset, CsvRequiresHeader) {
  EXPECT_EQ(code_of([] { parse_dataset("a,b\nx,y\n", DatasetFormat::Csv); }), ErrorCode::MalformedRecord);
}

TEST(LoadDataset, CsvFieldCountMismatchReportsLine) {
  try {
    parse_dataset("text,label\na,pos\nb\n", DatasetFormat::Csv);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::MalformedRecord);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos);
  }
}

TEST(LoadDataset, JsonlRoundTrip) {
  SyntheticSpec spec;
  spec.examples_per_class = 20;
  spec.classes = 3;
  const auto d = generate_synthetic(spec);
  const auto text = to_jsonl(d);
  const auto back = parse_dataset(text, DatasetFormat::Jsonl);
  // label names come back in first-appearance order, so compare by name
  ASSERT_EQ(back.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    EXPECT_EQ(back.examples()[i].text, d.examples()[i].text);
    EXPECT_EQ(back.label_names()[back.examples()[i].label], d.label_names()[d.examples()[i].label]);
  }
  EXPECT_EQ(to_jsonl(back), text);
}

TEST(SampleFewShot, CardinalityPerClass) {
  const auto src = balanced(100, 2);
  const auto s = sample_few_shot(src, 8, 1);
  EXPECT_EQ(s.size(), 16u);
  for (const auto& g : s.indices_by_class()) EXPECT_EQ(g.size(), 8u);
}

TEST(SampleFewShot, InsufficientClassNamesTheClass) {
  const auto src = balanced(5, 2);
  try {
    sample_few_shot(src, 8, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientClassSize);
    EXPECT_NE(std::string(e.what()).find("'c0'"), std::string::npos);
  }
}

TEST(SampleFewShot, DeterministicAndWithoutReplacement) {
  const auto src = balanced(30, 3);
  EXPECT_EQ(sample_few_shot(src, 10, 99), sample_few_shot(src, 10, 99));
  const auto s = sample_few_shot(src, 30, 5);
  std::set<std::string> texts;
  for (const auto& e : s.examples()) texts.insert(e.text);
  EXPECT_EQ(texts.size(), 90u);
}

TEST(MakeSplits, TenSplits) {
  const auto src = balanced(50, 2);
  const auto set = make_splits(src, 8, 10, 123);
  ASSERT_EQ(set.splits.size(), 10u);
  for (const auto& s : set.splits) EXPECT_EQ(s.size(), 16u);
}

TEST(MakeSplits, SingleSplitMatchesDerivedSeed) {
  const auto src = balanced(50, 2);
  const auto set = make_splits(src, 8, 1, 123);
  EXPECT_EQ(set.splits[0], sample_few_shot(src, 8, derive_split_seed(123, 0)));
  EXPECT_EQ(derive_split_seed(123, 0), 123u);
  EXPECT_EQ(derive_split_seed(123, 2), 123u ^ (2 * 0x9E3779B97F4A7C15ULL));
}

TEST(MakeSplits, DifferentIndicesDiffer) {
  const auto src = balanced(500, 2);
  const auto set = make_splits(src, 8, 2, 7);
  EXPECT_NE(set.splits[0], set.splits[1]);
}

TEST(MakeSplits, PropertyEverySplitHasExactCounts) {
  Rng rng(2024);
  for (int trial = 0; trial < 50; ++trial) {
    const auto classes = 2 + uniform_index(rng, 4);
    const auto per = 5 + uniform_index(rng, 20);
    const auto n = 1 + uniform_index(rng, per);
    const auto set = make_splits(balanced(per, classes), n, 3, rng());
    for (const auto& s : set.splits) {
      EXPECT_EQ(s.size(), n * classes);
      for (const auto& g : s.indices_by_class()) EXPECT_EQ(g.size(), n);
    }
  }
}
