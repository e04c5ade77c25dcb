#pragma once

// Few-shot distillation of a trained teacher into a smaller student.
//
// The student encoder regresses the teacher's cosine similarities on random
// pairs of unlabeled texts (alongside the usual labeled contrastive pairs),
// and the student head learns from the teacher's class probabilities on the
// unlabeled texts.

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "setfit/corpus.hpp"
#include "setfit/encoder.hpp"
#include "setfit/error.hpp"
#include "setfit/head.hpp"
#include "setfit/pairs.hpp"
#include "setfit/pipeline.hpp"
#include "setfit/rng.hpp"

namespace setfit {

struct DistillConfig {
  std::size_t unlabeled_pairs = 0;  // M
  std::size_t R = 20;
  PairMode pair_mode = PairMode::Strict;
  EncoderShape student{65536, 32, 256, 0};
  FinetuneConfig finetune;
  HeadTrainConfig head;
  double alpha = 0.5;
  std::uint64_t master_seed = 0;

  void validate() const {
    if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  }

  /// The plain-fit configuration a student with these settings corresponds to.
  FitConfig student_fit_config() const {
    FitConfig f;
    f.R = R;
    f.pair_mode = pair_mode;
    f.encoder = student;
    f.finetune = finetune;
    f.head = head;
    f.with_master_seed(master_seed);
    return f;
  }
};

struct SimilarityPair {
  std::string first;
  std::string second;
  double target = 0.0;
};

using IndexPair = std::pair<std::size_t, std::size_t>;

/// M ordered index pairs, each uniform over i != j.
inline std::vector<IndexPair> generate_unlabeled_pairs(std::size_t text_count, std::size_t M, std::uint64_t seed) {
  if (M == 0) return {};
  if (text_count < 2) throw Error(ErrorCode::TooFewTexts, "need at least 2 unlabeled texts to form pairs");
  auto rng = make_rng(seed);
  std::vector<IndexPair> out;
  out.reserve(M);
  for (std::size_t k = 0; k < M; ++k) {
    const auto i = static_cast<std::size_t>(uniform_index(rng, text_count));
    auto j = static_cast<std::size_t>(uniform_index(rng, text_count - 1));
    if (j >= i) ++j;
    out.emplace_back(i, j);
  }
  return out;
}

inline std::vector<IndexPair> generate_unlabeled_pairs(std::span<const std::string> unlabeled, std::size_t M,
                                                       std::uint64_t seed) {
  return generate_unlabeled_pairs(unlabeled.size(), M, seed);
}

/// Cosine similarity of each pair under the teacher's encoder.
inline std::vector<SimilarityPair> teacher_similarities(const Model& teacher, std::span<const std::string> texts,
                                                        std::span<const IndexPair> pairs) {
  std::vector<SimilarityPair> out;
  out.reserve(pairs.size());
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    const auto& [i, j] = pairs[k];
    try {
      const auto u = encode(teacher.encoder, texts[i]);
      const auto v = encode(teacher.encoder, texts[j]);
      out.push_back({texts[i], texts[j], cosine(u, v)});
    } catch (const Error& e) {
      e.rethrow_with_context("similarity pair " + std::to_string(k));
    }
  }
  return out;
}

struct DistillTrace {
  std::size_t labeled_pairs = 0;
  std::size_t similarity_pairs = 0;
  std::size_t hard_rows = 0;
  std::size_t soft_rows = 0;
};

inline Model distill(const Model& teacher, const Dataset& labeled, std::span<const std::string> unlabeled,
                     const DistillConfig& config, DistillTrace* trace = nullptr) {
  config.validate();
  if (labeled.empty()) throw Error(ErrorCode::EmptyDataset, "labeled dataset is empty");
  if (teacher.label_names != labeled.label_names()) {
    throw Error(ErrorCode::InvalidArgument, "teacher and labeled dataset disagree on label names");
  }
  const auto fit_cfg = config.student_fit_config();
  const auto& seeds = fit_cfg.seeds;

  PairSet pairs;
  try {
    pairs = generate_pairs(labeled, config.R, seeds.pairs, config.pair_mode);
  } catch (const Error& e) {
    e.rethrow_with_context("distill: labeled pair generation");
  }
  const std::size_t labeled_pairs = pairs.size();

  std::vector<SimilarityPair> sims;
  try {
    const auto index_pairs = generate_unlabeled_pairs(unlabeled, config.unlabeled_pairs, seeds.unlabeled);
    sims = teacher_similarities(teacher, unlabeled, index_pairs);
  } catch (const Error& e) {
    e.rethrow_with_context("distill: teacher similarities");
  }
  for (auto& s : sims) pairs.pairs.push_back({std::move(s.first), std::move(s.second), s.target});

  Model student;
  try {
    student.encoder = fit_encoder_step(pairs, fit_cfg);
  } catch (const Error& e) {
    e.rethrow_with_context("distill: student encoder");
  }

  HeadFit head_fit;
  if (unlabeled.empty()) {
    head_fit = fit_head_step(student.encoder, labeled, fit_cfg);
  } else {
    try {
      const auto hard = encode_all(student.encoder, labeled.texts());
      const auto soft = encode_all(student.encoder, unlabeled);
      std::vector<std::vector<double>> targets;
      targets.reserve(unlabeled.size());
      for (const auto& text : unlabeled) targets.push_back(predict_proba(teacher, text));
      auto head_cfg = fit_cfg.head;
      head_cfg.seed = seeds.head;
      const auto labels = labeled.labels();
      head_fit = train_head_mixed(hard, labels, soft, targets, config.alpha, labeled.label_names(), head_cfg);
    } catch (const Error& e) {
      e.rethrow_with_context("distill: student head");
    }
  }

  student.head = std::move(head_fit.head);
  student.label_names = labeled.label_names();
  student.config = fit_cfg;
  if (trace) *trace = {labeled_pairs, config.unlabeled_pairs, labeled.size(), unlabeled.size()};
  return student;
}

}  // namespace setfit
