#pragma once

// Seedable synthetic text-classification corpus. Each class owns a private
// vocabulary; every token is drawn from the shared noise vocabulary with
// probability `shared_fraction`, otherwise from the class vocabulary.

#include <cstdint>
#include <string>
#include <vector>

#include "setfit/corpus.hpp"
#include "setfit/rng.hpp"

namespace setfit {

struct SyntheticSpec {
  std::size_t classes = 2;
  std::size_t examples_per_class = 250;
  std::size_t class_vocab = 50;
  std::size_t shared_vocab = 50;
  double shared_fraction = 0.2;
  std::size_t min_tokens = 6;
  std::size_t max_tokens = 14;
  /// Probability that an example's label is replaced by a different class.
  double label_noise = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

/// Deterministic pronounceable word for (group, index): "ka" "lo" syllables.
inline std::string synth_word(std::size_t group, std::size_t index) {
  static constexpr const char* kOnsets = "bdfgklmnprstvz";
  static constexpr const char* kVowels = "aeiou";
  std::string w;
  std::size_t x = index * 131 + group * 7919 + 17;
  for (int s = 0; s < 3; ++s) {
    w.push_back(kOnsets[x % 14]);
    x /= 14;
    w.push_back(kVowels[x % 5]);
    x /= 5;
  }
  // suffix keeps words unique regardless of syllable collisions
  return w + std::to_string(group) + "x" + std::to_string(index);
}

}  // namespace detail

inline Dataset generate_synthetic(const SyntheticSpec& spec) {
  if (spec.classes < 2 || spec.class_vocab == 0 || spec.min_tokens == 0 || spec.max_tokens < spec.min_tokens) {
    throw Error(ErrorCode::InvalidArgument, "invalid synthetic corpus spec");
  }
  if (spec.shared_fraction > 0.0 && spec.shared_vocab == 0) {
    throw Error(ErrorCode::InvalidArgument, "shared_fraction > 0 needs a shared vocabulary");
  }
  auto rng = make_rng(spec.seed);
  std::vector<std::string> names;
  for (std::size_t c = 0; c < spec.classes; ++c) names.push_back("class" + std::to_string(c));

  std::vector<LabeledExample> examples;
  examples.reserve(spec.classes * spec.examples_per_class);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t n = 0; n < spec.examples_per_class; ++n) {
      const auto len = spec.min_tokens + uniform_index(rng, spec.max_tokens - spec.min_tokens + 1);
      std::string text;
      for (std::size_t t = 0; t < len; ++t) {
        const bool shared = uniform_unit(rng) < spec.shared_fraction;
        const auto word = shared ? detail::synth_word(spec.classes, uniform_index(rng, spec.shared_vocab))
                                 : detail::synth_word(c, uniform_index(rng, spec.class_vocab));
        if (!text.empty()) text.push_back(' ');
        text += word;
      }
      std::size_t label = c;
      if (spec.label_noise > 0.0 && uniform_unit(rng) < spec.label_noise) {
        label = (c + 1 + uniform_index(rng, spec.classes - 1)) % spec.classes;
      }
      examples.push_back({std::move(text), label});
    }
  }
  shuffle(std::span<LabeledExample>(examples), rng);
  return Dataset(std::move(examples), std::move(names));
}

}  // namespace setfit
