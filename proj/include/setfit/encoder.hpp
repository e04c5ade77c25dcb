#pragma once

// Hashed bag-of-embeddings sentence encoder with mean pooling, trained in a
// Siamese fashion on sentence pairs with a squared cosine-error loss.
//
// Parameters are stored as `Real` (float for persisted models, double for
// gradient checking); every reduction is carried out in double in a fixed
// order, so training is bitwise reproducible.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "setfit/error.hpp"
#include "setfit/pairs.hpp"
#include "setfit/rng.hpp"

namespace setfit {

/// Bucket ids of one sentence, in text order.
struct TokenSeq {
  std::vector<std::uint32_t> ids;

  std::size_t size() const noexcept { return ids.size(); }
  bool empty() const noexcept { return ids.empty(); }
};

struct SentenceEmbedding {
  std::vector<double> v;

  std::size_t dim() const noexcept { return v.size(); }
  friend bool operator==(const SentenceEmbedding&, const SentenceEmbedding&) = default;
};

template <std::floating_point Real>
struct BasicEncoderParams {
  std::size_t vocab_buckets = 65536;
  std::size_t dim = 64;
  std::size_t max_len = 256;
  std::uint64_t hash_seed = 0;
  std::vector<Real> table;  // vocab_buckets x dim, row-major

  std::span<const Real> row(std::size_t id) const { return {table.data() + id * dim, dim}; }
  std::span<Real> row(std::size_t id) { return {table.data() + id * dim, dim}; }

  friend bool operator==(const BasicEncoderParams&, const BasicEncoderParams&) = default;
};

using EncoderParams = BasicEncoderParams<float>;

struct FinetuneConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 16;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void validate() const {
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
      throw Error(ErrorCode::InvalidArgument, "learning_rate must be finite and non-negative");
    }
    if (batch_size == 0) throw Error(ErrorCode::InvalidArgument, "batch_size must be at least 1");
  }
};

namespace detail {

inline constexpr std::uint64_t kFnvOffset = 0xcbf29ce484222325ULL;
inline constexpr std::uint64_t kFnvPrime = 0x100000001b3ULL;

inline bool is_token_byte(unsigned char c) {
  // Bytes >= 0x80 belong to multi-byte UTF-8 sequences; keep them inside
  // tokens so non-Latin scripts are not split away.
  return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c >= 0x80;
}

}  // namespace detail

/// FNV-1a over the little-endian bytes of `seed` followed by `token`.
inline std::uint64_t hash_token(std::uint64_t seed, std::string_view token) {
  std::uint64_t h = detail::kFnvOffset;
  for (int i = 0; i < 8; ++i) {
    h ^= (seed >> (8 * i)) & 0xFF;
    h *= detail::kFnvPrime;
  }
  for (const char c : token) {
    h ^= static_cast<unsigned char>(c);
    h *= detail::kFnvPrime;
  }
  return h;
}

/// Lowercase, split on runs of non-alphanumerics, hash into buckets and
/// truncate to max_len.
template <class Real>
TokenSeq tokenize(const BasicEncoderParams<Real>& params, std::string_view text) {
  TokenSeq seq;
  std::string token;
  const auto flush = [&] {
    if (!token.empty() && seq.ids.size() < params.max_len) {
      seq.ids.push_back(static_cast<std::uint32_t>(hash_token(params.hash_seed, token) % params.vocab_buckets));
    }
    token.clear();
  };
  for (const char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (detail::is_token_byte(c)) {
      token.push_back((c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : ch);
    } else {
      flush();
      if (seq.ids.size() >= params.max_len) break;
    }
  }
  flush();
  return seq;
}

template <class Real>
SentenceEmbedding embed_tokens(const BasicEncoderParams<Real>& params, const TokenSeq& tokens) {
  if (tokens.empty()) throw Error(ErrorCode::EmptyInput, "no tokens to embed");
  SentenceEmbedding e{std::vector<double>(params.dim, 0.0)};
  for (const auto id : tokens.ids) {
    const auto r = params.row(id);
    for (std::size_t k = 0; k < params.dim; ++k) e.v[k] += static_cast<double>(r[k]);
  }
  const double inv = 1.0 / static_cast<double>(tokens.size());
  for (auto& x : e.v) x *= inv;
  return e;
}

/// Mean of the token rows.
template <class Real>
SentenceEmbedding encode(const BasicEncoderParams<Real>& params, std::string_view text) {
  const auto tokens = tokenize(params, text);
  if (tokens.empty()) throw Error(ErrorCode::EmptyInput, "text has no alphanumeric tokens");
  return embed_tokens(params, tokens);
}

inline constexpr double kMinNorm = 1e-12;

namespace detail {

struct CosineParts {
  double dot = 0.0;
  double uu = 0.0;
  double vv = 0.0;
  double cos = 0.0;
};

inline CosineParts cosine_parts(std::span<const double> u, std::span<const double> v) {
  if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "cosine of vectors with different lengths");
  CosineParts p;
  for (std::size_t k = 0; k < u.size(); ++k) {
    p.dot += u[k] * v[k];
    p.uu += u[k] * u[k];
    p.vv += v[k] * v[k];
  }
  if (std::sqrt(p.uu) < kMinNorm || std::sqrt(p.vv) < kMinNorm) {
    throw Error(ErrorCode::ZeroNorm, "vector norm below 1e-12");
  }
  // sqrt(uu * vv) rather than sqrt(uu) * sqrt(vv): for u == v this is
  // exactly uu, so identical inputs give a cosine of exactly 1.
  p.cos = std::clamp(p.dot / std::sqrt(p.uu * p.vv), -1.0, 1.0);
  return p;
}

}  // namespace detail

inline double cosine(std::span<const double> u, std::span<const double> v) {
  return detail::cosine_parts(u, v).cos;
}

inline double cosine(const SentenceEmbedding& u, const SentenceEmbedding& v) { return cosine(u.v, v.v); }

/// Gradient restricted to the table rows a pair touches, keyed by row id.
using SparseGrad = std::map<std::uint32_t, std::vector<double>>;

struct PairLossGrad {
  double loss = 0.0;
  SparseGrad grad;
};

/// (cos(ST(first), ST(second)) - target)^2
template <class Real>
double pair_loss(const BasicEncoderParams<Real>& params, const TrainPair& pair) {
  const auto u = encode(params, pair.first);
  const auto v = encode(params, pair.second);
  const double r = cosine(u, v) - pair.target;
  return r * r;
}

template <class Real>
PairLossGrad pair_loss_grad(const BasicEncoderParams<Real>& params, const TrainPair& pair) {
  const auto ta = tokenize(params, pair.first);
  const auto tb = tokenize(params, pair.second);
  if (ta.empty() || tb.empty()) throw Error(ErrorCode::EmptyInput, "pair member has no alphanumeric tokens");
  const auto u = embed_tokens(params, ta);
  const auto v = embed_tokens(params, tb);
  const auto p = detail::cosine_parts(u.v, v.v);

  const double residual = p.cos - pair.target;
  PairLossGrad out;
  out.loss = residual * residual;
  const std::size_t d = params.dim;

  // dL/du = 2 r (v / (|u||v|) - cos u / |u|^2), and symmetrically for v.
  const double nunv = std::sqrt(p.uu * p.vv);
  std::vector<double> gu(d), gv(d);
  for (std::size_t k = 0; k < d; ++k) {
    gu[k] = 2.0 * residual * (v.v[k] / nunv - p.cos * u.v[k] / p.uu);
    gv[k] = 2.0 * residual * (u.v[k] / nunv - p.cos * v.v[k] / p.vv);
  }

  const auto scatter = [&](const TokenSeq& tokens, const std::vector<double>& g) {
    const double w = 1.0 / static_cast<double>(tokens.size());
    for (const auto id : tokens.ids) {
      auto& row = out.grad[id];
      if (row.empty()) row.assign(d, 0.0);
      for (std::size_t k = 0; k < d; ++k) row[k] += w * g[k];
    }
  };
  scatter(ta, gu);
  scatter(tb, gv);
  return out;
}

/// Entries i.i.d. uniform in [-0.05, 0.05], filled row-major.
template <class Real = float>
BasicEncoderParams<Real> init_params(std::size_t vocab_buckets, std::size_t dim, std::size_t max_len,
                                     std::uint64_t hash_seed, std::uint64_t init_seed) {
  if (vocab_buckets == 0 || dim == 0 || max_len == 0) {
    throw Error(ErrorCode::InvalidArgument, "encoder dimensions must be positive");
  }
  BasicEncoderParams<Real> p{vocab_buckets, dim, max_len, hash_seed, {}};
  p.table.resize(vocab_buckets * dim);
  auto rng = make_rng(init_seed);
  for (auto& x : p.table) x = static_cast<Real>(uniform_real(rng, -0.05, 0.05));
  return p;
}

namespace detail {

/// Adam state for the rows that have received a gradient so far. Rows that
/// were never touched have zero moments and therefore a zero update.
class SparseAdam {
 public:
  SparseAdam(std::size_t dim, const FinetuneConfig& cfg) : dim_(dim), cfg_(cfg) {}

  template <class Real>
  void step(BasicEncoderParams<Real>& params, const SparseGrad& grad) {
    ++t_;
    for (const auto& [id, g] : grad) {
      auto& st = state_[id];
      if (st.m.empty()) {
        st.m.assign(dim_, 0.0);
        st.v.assign(dim_, 0.0);
      }
    }
    const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
    for (auto& [id, st] : state_) {
      const auto it = grad.find(id);
      const std::vector<double>* g = it == grad.end() ? nullptr : &it->second;
      auto row = params.row(id);
      for (std::size_t k = 0; k < dim_; ++k) {
        const double gk = g ? (*g)[k] : 0.0;
        st.m[k] = cfg_.beta1 * st.m[k] + (1.0 - cfg_.beta1) * gk;
        st.v[k] = cfg_.beta2 * st.v[k] + (1.0 - cfg_.beta2) * gk * gk;
        const double mhat = st.m[k] / c1;
        const double vhat = st.v[k] / c2;
        row[k] = static_cast<Real>(static_cast<double>(row[k]) -
                                   cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon));
      }
    }
  }

 private:
  struct RowState {
    std::vector<double> m;
    std::vector<double> v;
  };
  std::size_t dim_;
  FinetuneConfig cfg_;
  std::uint64_t t_ = 0;
  std::unordered_map<std::uint32_t, RowState> state_;
};

}  // namespace detail

/// Siamese fine-tuning: shuffle once per epoch, average pair gradients per
/// batch, take one Adam step per batch.
template <class Real>
BasicEncoderParams<Real> finetune(BasicEncoderParams<Real> params, const PairSet& pairs,
                                  const FinetuneConfig& config) {
  config.validate();
  if (pairs.empty() || config.epochs == 0) return params;

  detail::SparseAdam adam(params.dim, config);
  auto rng = make_rng(config.seed);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    shuffle(std::span<std::size_t>(order), rng);
    for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
      const std::size_t end = std::min(order.size(), start + config.batch_size);
      SparseGrad batch;
      for (std::size_t i = start; i < end; ++i) {
        PairLossGrad lg;
        try {
          lg = pair_loss_grad(params, pairs.pairs[order[i]]);
        } catch (const Error& e) {
          e.rethrow_with_context("pair " + std::to_string(order[i]));
        }
        for (auto& [id, g] : lg.grad) {
          auto& acc = batch[id];
          if (acc.empty()) {
            acc = std::move(g);
          } else {
            for (std::size_t k = 0; k < acc.size(); ++k) acc[k] += g[k];
          }
        }
      }
      const double inv = 1.0 / static_cast<double>(end - start);
      for (auto& [id, g] : batch) {
        for (auto& x : g) x *= inv;
      }
      adam.step(params, batch);
    }
  }
  return params;
}

/// Mean pair loss over a set; handy for monitoring training.
template <class Real>
double mean_pair_loss(const BasicEncoderParams<Real>& params, const PairSet& pairs) {
  if (pairs.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& p : pairs.pairs) sum += pair_loss(params, p);
  return sum / static_cast<double>(pairs.size());
}

/// What a sentence encoder must provide to be used as the embedding stage.
template <class E>
concept SentenceEncoder = requires(const E& enc, E& mut, std::string_view text, const PairSet& pairs,
                                   const FinetuneConfig& cfg) {
  { enc.embed(text) } -> std::same_as<SentenceEmbedding>;
  { enc.dimension() } -> std::convertible_to<std::size_t>;
  mut.train_on_pairs(pairs, cfg);
};

/// Adapter exposing BasicEncoderParams through the SentenceEncoder interface.
template <class Real = float>
class HashedBagEncoder {
 public:
  explicit HashedBagEncoder(BasicEncoderParams<Real> params) : params_(std::move(params)) {}

  SentenceEmbedding embed(std::string_view text) const { return encode(params_, text); }
  std::size_t dimension() const noexcept { return params_.dim; }
  void train_on_pairs(const PairSet& pairs, const FinetuneConfig& cfg) {
    params_ = finetune(std::move(params_), pairs, cfg);
  }

  const BasicEncoderParams<Real>& params() const noexcept { return params_; }

 private:
  BasicEncoderParams<Real> params_;
};

static_assert(SentenceEncoder<HashedBagEncoder<float>>);

}  // namespace setfit
