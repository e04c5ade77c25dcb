#pragma once

// Two-step training (contrastive encoder fine-tuning, then a logistic
// regression head on the fine-tuned embeddings) and inference.

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "setfit/corpus.hpp"
#include "setfit/encoder.hpp"
#include "setfit/error.hpp"
#include "setfit/head.hpp"
#include "setfit/pairs.hpp"

namespace setfit {

inline constexpr std::string_view kModelFormatVersion = "SETFIT-DESK/1";

/// Independent seed streams derived from one master seed.
struct SeedPlan {
  std::uint64_t pairs = 0;
  std::uint64_t init = 0;
  std::uint64_t shuffle = 0;
  std::uint64_t head = 0;
  std::uint64_t unlabeled = 0;

  static constexpr std::uint64_t kPairsSalt = 0x50414952535F5331ULL;      // "PAIRS_S1"
  static constexpr std::uint64_t kInitSalt = 0x494E49545F5F5332ULL;       // "INIT__S2"
  static constexpr std::uint64_t kShuffleSalt = 0x53485546464C5333ULL;    // "SHUFFLS3"
  static constexpr std::uint64_t kHeadSalt = 0x484541445F5F5334ULL;       // "HEAD__S4"
  static constexpr std::uint64_t kUnlabeledSalt = 0x554E4C41424C5335ULL;  // "UNLABLS5"

  static constexpr SeedPlan from_master(std::uint64_t master) {
    return {master ^ kPairsSalt, master ^ kInitSalt, master ^ kShuffleSalt, master ^ kHeadSalt,
            master ^ kUnlabeledSalt};
  }

  friend bool operator==(const SeedPlan&, const SeedPlan&) = default;
};

struct EncoderShape {
  std::size_t vocab_buckets = 65536;
  std::size_t dim = 64;
  std::size_t max_len = 256;
  std::uint64_t hash_seed = 0;

  friend bool operator==(const EncoderShape&, const EncoderShape&) = default;
};

struct FitConfig {
  std::size_t R = 20;
  PairMode pair_mode = PairMode::Strict;
  EncoderShape encoder;
  FinetuneConfig finetune;
  HeadTrainConfig head;
  std::uint64_t master_seed = 0;
  SeedPlan seeds = SeedPlan::from_master(0);

  /// Set the master seed and re-derive every stream from it.
  FitConfig& with_master_seed(std::uint64_t master) {
    master_seed = master;
    seeds = SeedPlan::from_master(master);
    return *this;
  }
};

struct Model {
  EncoderParams encoder;
  HeadParams head;
  std::vector<std::string> label_names;
  FitConfig config;
  std::string format_version{kModelFormatVersion};
};

/// Counts observed while fitting, for callers that want to audit a run.
struct FitTrace {
  std::size_t pair_count = 0;
  std::size_t head_rows = 0;
  std::vector<double> head_loss_history;
};

inline EncoderParams init_encoder(const EncoderShape& shape, std::uint64_t init_seed) {
  return init_params<float>(shape.vocab_buckets, shape.dim, shape.max_len, shape.hash_seed, init_seed);
}

inline std::vector<SentenceEmbedding> encode_all(const EncoderParams& encoder, std::span<const std::string> texts) {
  std::vector<SentenceEmbedding> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); ++i) {
    try {
      out.push_back(encode(encoder, texts[i]));
    } catch (const Error& e) {
      e.rethrow_with_context("text " + std::to_string(i));
    }
  }
  return out;
}

/// Step 2 of training, split out so callers can check it leaves the encoder alone.
inline HeadFit fit_head_step(const EncoderParams& encoder, const Dataset& train, const FitConfig& config) {
  std::vector<SentenceEmbedding> embs;
  try {
    embs = encode_all(encoder, train.texts());
  } catch (const Error& e) {
    e.rethrow_with_context("head training");
  }
  auto head_cfg = config.head;
  head_cfg.seed = config.seeds.head;
  const auto labels = train.labels();
  try {
    return train_head_traced(embs, labels, train.label_names(), head_cfg);
  } catch (const Error& e) {
    e.rethrow_with_context("head training");
  }
}

/// Step 1 of training.
inline EncoderParams fit_encoder_step(const PairSet& pairs, const FitConfig& config) {
  auto encoder = init_encoder(config.encoder, config.seeds.init);
  auto ft = config.finetune;
  ft.seed = config.seeds.shuffle;
  try {
    return finetune(std::move(encoder), pairs, ft);
  } catch (const Error& e) {
    e.rethrow_with_context("encoder fine-tuning");
  }
}

inline Model fit(const Dataset& train, const FitConfig& config, FitTrace* trace = nullptr) {
  if (train.empty()) throw Error(ErrorCode::EmptyDataset, "training dataset is empty");

  PairSet pairs;
  try {
    pairs = generate_pairs(train, config.R, config.seeds.pairs, config.pair_mode);
  } catch (const Error& e) {
    e.rethrow_with_context("pair generation");
  }

  Model model;
  model.encoder = fit_encoder_step(pairs, config);
  auto head_fit = fit_head_step(model.encoder, train, config);
  model.head = std::move(head_fit.head);
  model.label_names = train.label_names();
  model.config = config;

  if (trace) {
    trace->pair_count = pairs.size();
    trace->head_rows = train.size();
    trace->head_loss_history = std::move(head_fit.loss_history);
  }
  return model;
}

inline std::vector<double> predict_proba(const Model& model, std::string_view text) {
  return head_predict(model.head, encode(model.encoder, text)).probabilities;
}

inline std::size_t predict(const Model& model, std::string_view text) {
  return head_predict(model.head, encode(model.encoder, text)).label;
}

inline std::vector<std::size_t> predict_all(const Model& model, std::span<const std::string> texts) {
  std::vector<std::size_t> out;
  out.reserve(texts.size());
  for (const auto& t : texts) out.push_back(predict(model, t));
  return out;
}

}  // namespace setfit
