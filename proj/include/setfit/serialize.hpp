#pragma once

// JSON mappings for configuration structs (model manifests and reports).

#include <nlohmann/json.hpp>

#include "setfit/pipeline.hpp"

namespace setfit {

NLOHMANN_JSON_SERIALIZE_ENUM(PairMode, {{PairMode::Strict, "strict"}, {PairMode::Permissive, "permissive"}})

NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(SeedPlan, pairs, init, shuffle, head, unlabeled)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(EncoderShape, vocab_buckets, dim, max_len, hash_seed)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FinetuneConfig, learning_rate, batch_size, epochs, seed, beta1, beta2, epsilon)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(HeadTrainConfig, l2_lambda, max_iters, tol, learning_rate, seed, beta1, beta2,
                                   epsilon, warmup_iters)
NLOHMANN_DEFINE_TYPE_NON_INTRUSIVE(FitConfig, R, pair_mode, encoder, finetune, head, master_seed, seeds)

}  // namespace setfit
