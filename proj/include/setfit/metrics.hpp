#pragma once

// Evaluation metrics: accuracy, Matthews correlation, MAE x 100 and average
// precision.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "setfit/error.hpp"

namespace setfit::metrics {

namespace detail {

template <class A, class B>
void check_lengths(std::span<A> pred, std::span<B> gold) {
  if (pred.size() != gold.size()) {
    throw Error(ErrorCode::LengthMismatch, std::to_string(pred.size()) + " predictions vs " +
                                               std::to_string(gold.size()) + " gold labels");
  }
  if (gold.empty()) throw Error(ErrorCode::Empty, "no examples to score");
}

}  // namespace detail

inline double accuracy(std::span<const std::size_t> pred, std::span<const std::size_t> gold) {
  detail::check_lengths(pred, gold);
  std::size_t hits = 0;
  for (std::size_t i = 0; i < gold.size(); ++i) hits += pred[i] == gold[i];
  return static_cast<double>(hits) / static_cast<double>(gold.size());
}

struct Confusion {
  std::uint64_t tp = 0, tn = 0, fp = 0, fn = 0;
};

/// Binary confusion counts with class 1 as the positive class.
inline Confusion confusion(std::span<const std::size_t> pred, std::span<const std::size_t> gold) {
  detail::check_lengths(pred, gold);
  Confusion c;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    if (pred[i] > 1 || gold[i] > 1) throw Error(ErrorCode::NonBinary, "MCC needs labels in {0, 1}");
    if (pred[i] == 1) {
      (gold[i] == 1 ? c.tp : c.fp) += 1;
    } else {
      (gold[i] == 1 ? c.fn : c.tn) += 1;
    }
  }
  return c;
}

/// Zero whenever any marginal in the denominator is zero.
inline double mcc(const Confusion& c) {
  const double tp = static_cast<double>(c.tp), tn = static_cast<double>(c.tn);
  const double fp = static_cast<double>(c.fp), fn = static_cast<double>(c.fn);
  const double den = (tp + fp) * (tp + fn) * (tn + fp) * (tn + fn);
  if (den == 0.0) return 0.0;
  return (tp * tn - fp * fn) / std::sqrt(den);
}

inline double mcc(std::span<const std::size_t> pred, std::span<const std::size_t> gold) {
  return mcc(confusion(pred, gold));
}

/// 100 * mean |pred - gold| over ordinal labels.
inline double mae_x100(std::span<const std::size_t> pred, std::span<const std::size_t> gold) {
  detail::check_lengths(pred, gold);
  double sum = 0.0;
  for (std::size_t i = 0; i < gold.size(); ++i) {
    sum += pred[i] > gold[i] ? static_cast<double>(pred[i] - gold[i]) : static_cast<double>(gold[i] - pred[i]);
  }
  return 100.0 * sum / static_cast<double>(gold.size());
}

/// Step-wise average precision: sum over distinct score thresholds (high to
/// low) of (recall gained) * (precision at that threshold). Equal scores form
/// a single threshold.
inline double average_precision(std::span<const double> scores, std::span<const std::size_t> gold) {
  detail::check_lengths(scores, gold);
  std::size_t positives = 0;
  for (const auto g : gold) {
    if (g > 1) throw Error(ErrorCode::NonBinary, "average precision needs labels in {0, 1}");
    positives += g;
  }
  if (positives == 0) throw Error(ErrorCode::NoPositives, "average precision needs at least one positive");

  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });

  double ap = 0.0;
  std::size_t tp = 0, seen = 0;
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    std::size_t group_tp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      group_tp += gold[order[j]];
      ++j;
    }
    tp += group_tp;
    seen = j;
    if (group_tp > 0) {
      const double recall_step = static_cast<double>(group_tp) / static_cast<double>(positives);
      ap += recall_step * static_cast<double>(tp) / static_cast<double>(seen);
    }
    i = j;
  }
  return ap;
}

enum class Metric { Accuracy, Mcc, MaeX100, AveragePrecision };

inline Metric parse_metric(std::string_view name) {
  if (name == "accuracy") return Metric::Accuracy;
  if (name == "mcc") return Metric::Mcc;
  if (name == "mae_x100") return Metric::MaeX100;
  if (name == "average_precision") return Metric::AveragePrecision;
  throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

inline std::string_view to_string(Metric m) {
  switch (m) {
    case Metric::Accuracy: return "accuracy";
    case Metric::Mcc: return "mcc";
    case Metric::MaeX100: return "mae_x100";
    case Metric::AveragePrecision: return "average_precision";
  }
  return "accuracy";
}

}  // namespace setfit::metrics
