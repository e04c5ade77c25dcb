#pragma once

// FLOPs-per-token cost estimates: about 2N FLOPs per token for inference and
// 6N for training with N parameters, halved for encoder-decoder models
// because each token passes through only one of the two stacks.

#include <cmath>
#include <string>
#include <string_view>

#include "setfit/error.hpp"

namespace setfit::cost {

enum class Arch { EncoderOnly, EncoderDecoder };

struct CostSpec {
  double n_params = 0.0;
  double seq_len = 0.0;
  Arch arch = Arch::EncoderOnly;
  double n_steps = 1000.0;
  double n_batch = 8.0;
};

inline void validate(const CostSpec& s) {
  const auto positive = [](double x) { return std::isfinite(x) && x > 0.0; };
  if (!positive(s.n_params)) throw Error(ErrorCode::InvalidSpec, "n_params must be positive");
  if (!positive(s.seq_len)) throw Error(ErrorCode::InvalidSpec, "seq_len must be positive");
  if (!positive(s.n_steps)) throw Error(ErrorCode::InvalidSpec, "n_steps must be positive");
  if (!positive(s.n_batch)) throw Error(ErrorCode::InvalidSpec, "n_batch must be positive");
}

inline double arch_factor(Arch a) { return a == Arch::EncoderDecoder ? 0.5 : 1.0; }

inline double inference_flops(const CostSpec& s) {
  validate(s);
  return 2.0 * s.n_params * s.seq_len * arch_factor(s.arch);
}

inline double training_flops(const CostSpec& s) {
  validate(s);
  return 6.0 * s.n_params * s.seq_len * s.n_steps * s.n_batch * arch_factor(s.arch);
}

/// How many times cheaper `candidate` is than `reference` at inference.
inline double speedup(const CostSpec& reference, const CostSpec& candidate) {
  return inference_flops(reference) / inference_flops(candidate);
}

inline double training_speedup(const CostSpec& reference, const CostSpec& candidate) {
  return training_flops(reference) / training_flops(candidate);
}

/// Round to `digits` significant figures (half away from zero).
inline double round_sig(double x, int digits) {
  if (x == 0.0 || !std::isfinite(x)) return x;
  const int exponent = static_cast<int>(std::floor(std::log10(std::abs(x))));
  const int shift = digits - 1 - exponent;
  if (shift < 0) {
    const double unit = std::pow(10.0, -shift);
    return std::round(x / unit) * unit;
  }
  const double scale = std::pow(10.0, shift);
  return std::round(x * scale) / scale;
}

inline std::string_view to_string(Arch a) { return a == Arch::EncoderDecoder ? "encoder_decoder" : "encoder_only"; }

inline Arch parse_arch(std::string_view s) {
  if (s == "encoder_only") return Arch::EncoderOnly;
  if (s == "encoder_decoder") return Arch::EncoderDecoder;
  throw Error(ErrorCode::InvalidSpec, "unknown arch '" + std::string(s) + "'");
}

}  // namespace setfit::cost
