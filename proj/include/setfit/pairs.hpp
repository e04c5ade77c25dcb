#pragma once

// Contrastive pair construction for Siamese encoder fine-tuning.

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "setfit/corpus.hpp"
#include "setfit/error.hpp"
#include "setfit/rng.hpp"

namespace setfit {

inline constexpr std::size_t kNoIndex = std::numeric_limits<std::size_t>::max();

/// Two sentences and their similarity target in [-1, 1]. Pairs built from a
/// labeled dataset remember which examples they came from.
struct TrainPair {
  std::string first;
  std::string second;
  double target = 0.0;
  std::size_t first_index = kNoIndex;
  std::size_t second_index = kNoIndex;

  friend bool operator==(const TrainPair&, const TrainPair&) = default;
};

struct PairSet {
  std::vector<TrainPair> pairs;
  std::size_t R = 0;
  std::size_t class_count = 0;

  std::size_t size() const noexcept { return pairs.size(); }
  bool empty() const noexcept { return pairs.empty(); }

  friend bool operator==(const PairSet&, const PairSet&) = default;
};

enum class PairMode { Strict, Permissive };

/// For each class: R positives (two distinct members of the class) followed
/// by R negatives (a member of the class and a member of any other class).
/// Draws are with replacement across the R repetitions.
///
/// Permissive mode lets a singleton class pair its example with itself.
inline PairSet generate_pairs(const Dataset& train, std::size_t R, std::uint64_t seed,
                              PairMode mode = PairMode::Strict) {
  PairSet out{{}, R, train.class_count()};
  if (R == 0) return out;

  const auto groups = train.indices_by_class();
  std::size_t populated = 0;
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (!groups[c].empty()) ++populated;
    if (mode == PairMode::Strict && groups[c].size() < 2) {
      throw Error(ErrorCode::DegenerateClass, "class '" + train.label_names()[c] + "' has " +
                                                  std::to_string(groups[c].size()) +
                                                  " example(s); positives need at least 2");
    }
  }
  if (populated < 2) throw Error(ErrorCode::NeedTwoClasses, "negative pairs need at least two populated classes");

  const auto& ex = train.examples();
  auto rng = make_rng(seed);
  out.pairs.reserve(2 * R * groups.size());
  for (std::size_t c = 0; c < groups.size(); ++c) {
    const auto& members = groups[c];
    if (members.empty()) continue;

    for (std::size_t r = 0; r < R; ++r) {
      const auto a = static_cast<std::size_t>(uniform_index(rng, members.size()));
      std::size_t b = a;
      if (members.size() > 1) {
        b = static_cast<std::size_t>(uniform_index(rng, members.size() - 1));
        if (b >= a) ++b;
      }
      const auto i = members[a];
      const auto j = members[b];
      out.pairs.push_back({ex[i].text, ex[j].text, 1.0, i, j});
    }

    const std::size_t others = train.size() - members.size();
    for (std::size_t r = 0; r < R; ++r) {
      const auto i = members[static_cast<std::size_t>(uniform_index(rng, members.size()))];
      // k-th example (in dataset order) not belonging to class c
      auto k = static_cast<std::size_t>(uniform_index(rng, others));
      std::size_t j = 0;
      for (; j < ex.size(); ++j) {
        if (ex[j].label == c) continue;
        if (k == 0) break;
        --k;
      }
      out.pairs.push_back({ex[i].text, ex[j].text, 0.0, i, j});
    }
  }
  return out;
}

/// Number of unordered pairs of distinct items among K.
constexpr std::uint64_t max_unique_pairs(std::uint64_t K) { return K < 2 ? 0 : K * (K - 1) / 2; }

inline std::string pairs_to_jsonl(const PairSet& set) {
  std::string out;
  for (const auto& p : set.pairs) {
    out += nlohmann::json{{"first", p.first}, {"second", p.second}, {"target", p.target}}.dump();
    out += '\n';
  }
  return out;
}

}  // namespace setfit
