#pragma once

// Multinomial logistic-regression classification head.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "setfit/encoder.hpp"
#include "setfit/error.hpp"

namespace setfit {

template <std::floating_point Real>
struct BasicHeadParams {
  std::size_t dim = 0;
  std::vector<Real> weights;  // classes x dim, row-major
  std::vector<Real> bias;     // classes
  std::vector<std::string> label_names;

  std::size_t class_count() const noexcept { return bias.size(); }

  friend bool operator==(const BasicHeadParams&, const BasicHeadParams&) = default;
};

using HeadParams = BasicHeadParams<float>;

struct HeadTrainConfig {
  double l2_lambda = 1e-4;
  std::size_t max_iters = 1000;
  double tol = 1e-7;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  /// The stopping rule is not applied during the first `warmup_iters` steps.
  std::size_t warmup_iters = 10;

  void validate() const {
    if (!(l2_lambda >= 0.0) || !std::isfinite(l2_lambda)) throw Error(ErrorCode::InvalidArgument, "l2_lambda must be >= 0");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
      throw Error(ErrorCode::InvalidArgument, "head learning_rate must be positive");
    }
    if (!(tol >= 0.0)) throw Error(ErrorCode::InvalidArgument, "tol must be >= 0");
  }
};

template <class Real>
std::vector<double> head_logits(const BasicHeadParams<Real>& head, std::span<const double> v) {
  if (v.size() != head.dim) {
    throw Error(ErrorCode::DimensionMismatch, "embedding has dimension " + std::to_string(v.size()) + ", head expects " +
                                                  std::to_string(head.dim));
  }
  std::vector<double> z(head.class_count());
  for (std::size_t c = 0; c < z.size(); ++c) {
    double acc = 0.0;
    const Real* w = head.weights.data() + c * head.dim;
    for (std::size_t k = 0; k < head.dim; ++k) acc += static_cast<double>(w[k]) * v[k];
    z[c] = acc + static_cast<double>(head.bias[c]);
  }
  return z;
}

template <class Real>
std::vector<double> head_logits(const BasicHeadParams<Real>& head, const SentenceEmbedding& e) {
  return head_logits(head, std::span<const double>(e.v));
}

inline std::vector<double> softmax(std::span<const double> z) {
  std::vector<double> p(z.size());
  if (z.empty()) return p;
  const double m = *std::max_element(z.begin(), z.end());
  double sum = 0.0;
  for (std::size_t c = 0; c < z.size(); ++c) {
    p[c] = std::exp(z[c] - m);
    sum += p[c];
  }
  for (auto& x : p) x /= sum;
  return p;
}

/// Index of the largest entry; ties go to the lowest index.
inline std::size_t argmax(std::span<const double> x) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    if (x[i] > x[best]) best = i;
  }
  return best;
}

struct Prediction {
  std::size_t label = 0;
  std::vector<double> probabilities;
};

template <class Real>
Prediction head_predict(const BasicHeadParams<Real>& head, const SentenceEmbedding& e) {
  const auto z = head_logits(head, e);
  Prediction p;
  p.label = argmax(z);
  p.probabilities = softmax(z);
  return p;
}

/// Value and gradient of the weighted cross-entropy objective
///   sum_i w_i H(t_i, softmax(W x_i + b)) + (l2/2) |W|^2
/// over a dense design matrix. Public so tests can probe it directly.
struct HeadObjective {
  double loss = 0.0;
  std::vector<double> grad_w;  // classes x dim
  std::vector<double> grad_b;  // classes
};

inline HeadObjective head_objective(std::span<const double> weights, std::span<const double> bias,
                                    std::span<const double> features, std::span<const double> targets,
                                    std::span<const double> row_weights, std::size_t dim, double l2) {
  const std::size_t classes = bias.size();
  const std::size_t n = row_weights.size();
  HeadObjective out{0.0, std::vector<double>(classes * dim, 0.0), std::vector<double>(classes, 0.0)};
  std::vector<double> z(classes);
  for (std::size_t i = 0; i < n; ++i) {
    const double* x = features.data() + i * dim;
    const double* t = targets.data() + i * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      double acc = 0.0;
      for (std::size_t k = 0; k < dim; ++k) acc += weights[c * dim + k] * x[k];
      z[c] = acc + bias[c];
    }
    const double m = *std::max_element(z.begin(), z.end());
    double sum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) sum += std::exp(z[c] - m);
    const double log_sum = m + std::log(sum);
    double ce = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
      if (t[c] != 0.0) ce -= t[c] * (z[c] - log_sum);
    }
    out.loss += row_weights[i] * ce;
    // dH/dz_c = p_c * sum(t) - t_c, with sum(t) == 1 for distributions.
    double tsum = 0.0;
    for (std::size_t c = 0; c < classes; ++c) tsum += t[c];
    for (std::size_t c = 0; c < classes; ++c) {
      const double p = std::exp(z[c] - log_sum);
      const double dz = row_weights[i] * (p * tsum - t[c]);
      out.grad_b[c] += dz;
      double* gw = out.grad_w.data() + c * dim;
      for (std::size_t k = 0; k < dim; ++k) gw[k] += dz * x[k];
    }
  }
  double sq = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    sq += weights[j] * weights[j];
    out.grad_w[j] += l2 * weights[j];
  }
  out.loss += 0.5 * l2 * sq;
  return out;
}

struct HeadFit {
  HeadParams head;
  /// Objective value of every accepted iterate, starting with W = 0, b = 0.
  std::vector<double> loss_history;
};

namespace detail {

inline void check_dims(std::span<const SentenceEmbedding> embeddings) {
  if (embeddings.empty()) throw Error(ErrorCode::EmptyDataset, "no embeddings to train on");
  const auto d = embeddings.front().dim();
  if (d == 0) throw Error(ErrorCode::DimensionMismatch, "zero-dimensional embeddings");
  for (std::size_t i = 1; i < embeddings.size(); ++i) {
    if (embeddings[i].dim() != d) {
      throw Error(ErrorCode::DimensionMismatch, "embedding " + std::to_string(i) + " has dimension " +
                                                    std::to_string(embeddings[i].dim()) + ", expected " +
                                                    std::to_string(d));
    }
  }
}

inline void check_distribution(std::span<const double> t, std::size_t row) {
  double sum = 0.0;
  for (const double x : t) {
    if (!(x >= 0.0) || !std::isfinite(x)) {
      throw Error(ErrorCode::InvalidDistribution, "target " + std::to_string(row) + " has a negative or non-finite entry");
    }
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-6) {
    throw Error(ErrorCode::InvalidDistribution, "target " + std::to_string(row) + " sums to " + std::to_string(sum));
  }
}

/// Full-batch Adam from zero. Stops after max_iters, or (past warm-up) as
/// soon as a step lowers the objective by less than tol; a step that raises
/// the objective is discarded.
inline HeadFit fit_head(std::span<const double> features, std::span<const double> targets,
                        std::span<const double> row_weights, std::size_t dim,
                        std::vector<std::string> label_names, const HeadTrainConfig& cfg) {
  cfg.validate();
  const std::size_t classes = label_names.size();
  std::vector<double> w(classes * dim, 0.0), b(classes, 0.0);
  std::vector<double> mw(w.size(), 0.0), vw(w.size(), 0.0), mb(classes, 0.0), vb(classes, 0.0);

  HeadFit fit;
  auto current = head_objective(w, b, features, targets, row_weights, dim, cfg.l2_lambda);
  fit.loss_history.push_back(current.loss);

  const auto adam = [&](std::vector<double>& p, std::vector<double>& m, std::vector<double>& v,
                        const std::vector<double>& g, double c1, double c2) {
    for (std::size_t j = 0; j < p.size(); ++j) {
      m[j] = cfg.beta1 * m[j] + (1.0 - cfg.beta1) * g[j];
      v[j] = cfg.beta2 * v[j] + (1.0 - cfg.beta2) * g[j] * g[j];
      p[j] -= cfg.learning_rate * (m[j] / c1) / (std::sqrt(v[j] / c2) + cfg.epsilon);
    }
  };

  for (std::size_t it = 1; it <= cfg.max_iters; ++it) {
    const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(it));
    const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(it));
    auto w_next = w, b_next = b;
    adam(w_next, mw, vw, current.grad_w, c1, c2);
    adam(b_next, mb, vb, current.grad_b, c1, c2);
    auto next = head_objective(w_next, b_next, features, targets, row_weights, dim, cfg.l2_lambda);

    const double decrease = current.loss - next.loss;
    const bool past_warmup = it > cfg.warmup_iters;
    if (past_warmup && decrease < 0.0) break;
    w = std::move(w_next);
    b = std::move(b_next);
    current = std::move(next);
    fit.loss_history.push_back(current.loss);
    if (past_warmup && decrease < cfg.tol) break;
  }

  fit.head.dim = dim;
  fit.head.label_names = std::move(label_names);
  fit.head.weights.assign(w.begin(), w.end());
  fit.head.bias.assign(b.begin(), b.end());
  return fit;
}

inline std::vector<double> flatten(std::span<const SentenceEmbedding> embeddings) {
  std::vector<double> x;
  x.reserve(embeddings.size() * embeddings.front().dim());
  for (const auto& e : embeddings) x.insert(x.end(), e.v.begin(), e.v.end());
  return x;
}

inline std::vector<double> one_hot(std::span<const std::size_t> labels, std::size_t classes) {
  std::vector<double> t(labels.size() * classes, 0.0);
  for (std::size_t i = 0; i < labels.size(); ++i) t[i * classes + labels[i]] = 1.0;
  return t;
}

inline void check_labels(std::span<const std::size_t> labels, std::size_t classes) {
  if (classes < 2) throw Error(ErrorCode::SingleClass, "head needs at least two label names");
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] >= classes) {
      throw Error(ErrorCode::LabelOutOfRange, "label " + std::to_string(labels[i]) + " at row " + std::to_string(i));
    }
  }
}

}  // namespace detail

/// Hard-label training with the full optimizer trace.
inline HeadFit train_head_traced(std::span<const SentenceEmbedding> embeddings, std::span<const std::size_t> labels,
                                 std::vector<std::string> label_names, const HeadTrainConfig& config) {
  detail::check_dims(embeddings);
  if (embeddings.size() != labels.size()) {
    throw Error(ErrorCode::DimensionMismatch, std::to_string(embeddings.size()) + " embeddings but " +
                                                  std::to_string(labels.size()) + " labels");
  }
  detail::check_labels(labels, label_names.size());
  if (std::adjacent_find(labels.begin(), labels.end(), std::not_equal_to<>()) == labels.end()) {
    throw Error(ErrorCode::SingleClass, "all training labels are identical");
  }
  const auto x = detail::flatten(embeddings);
  const auto t = detail::one_hot(labels, label_names.size());
  const std::vector<double> w(labels.size(), 1.0 / static_cast<double>(labels.size()));
  return detail::fit_head(x, t, w, embeddings.front().dim(), std::move(label_names), config);
}

inline HeadParams train_head(std::span<const SentenceEmbedding> embeddings, std::span<const std::size_t> labels,
                             std::vector<std::string> label_names, const HeadTrainConfig& config) {
  return train_head_traced(embeddings, labels, std::move(label_names), config).head;
}

/// Cross-entropy against per-row probability targets.
inline HeadFit train_head_soft_traced(std::span<const SentenceEmbedding> embeddings,
                                      std::span<const std::vector<double>> soft_targets,
                                      std::vector<std::string> label_names, const HeadTrainConfig& config) {
  detail::check_dims(embeddings);
  if (embeddings.size() != soft_targets.size()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding and target counts differ");
  }
  const std::size_t classes = label_names.size();
  if (classes < 2) throw Error(ErrorCode::SingleClass, "head needs at least two label names");
  std::vector<double> t;
  t.reserve(soft_targets.size() * classes);
  for (std::size_t i = 0; i < soft_targets.size(); ++i) {
    if (soft_targets[i].size() != classes) {
      throw Error(ErrorCode::InvalidDistribution, "target " + std::to_string(i) + " has wrong length");
    }
    detail::check_distribution(soft_targets[i], i);
    t.insert(t.end(), soft_targets[i].begin(), soft_targets[i].end());
  }
  const auto x = detail::flatten(embeddings);
  const std::vector<double> w(embeddings.size(), 1.0 / static_cast<double>(embeddings.size()));
  return detail::fit_head(x, t, w, embeddings.front().dim(), std::move(label_names), config);
}

inline HeadParams train_head_soft(std::span<const SentenceEmbedding> embeddings,
                                  std::span<const std::vector<double>> soft_targets,
                                  std::vector<std::string> label_names, const HeadTrainConfig& config) {
  return train_head_soft_traced(embeddings, soft_targets, std::move(label_names), config).head;
}

/// alpha * mean soft cross-entropy + (1 - alpha) * mean hard cross-entropy.
/// With one group empty the other carries the whole weight.
inline HeadFit train_head_mixed(std::span<const SentenceEmbedding> hard_embeddings,
                                std::span<const std::size_t> hard_labels,
                                std::span<const SentenceEmbedding> soft_embeddings,
                                std::span<const std::vector<double>> soft_targets, double alpha,
                                std::vector<std::string> label_names, const HeadTrainConfig& config) {
  if (!(alpha >= 0.0 && alpha <= 1.0)) throw Error(ErrorCode::InvalidArgument, "alpha must lie in [0, 1]");
  if (soft_embeddings.empty()) return train_head_traced(hard_embeddings, hard_labels, std::move(label_names), config);
  if (hard_embeddings.empty()) {
    return train_head_soft_traced(soft_embeddings, soft_targets, std::move(label_names), config);
  }
  const std::size_t classes = label_names.size();
  if (hard_embeddings.size() != hard_labels.size() || soft_embeddings.size() != soft_targets.size()) {
    throw Error(ErrorCode::DimensionMismatch, "embedding and target counts differ");
  }
  detail::check_labels(hard_labels, classes);

  std::vector<SentenceEmbedding> all(hard_embeddings.begin(), hard_embeddings.end());
  all.insert(all.end(), soft_embeddings.begin(), soft_embeddings.end());
  detail::check_dims(all);

  auto t = detail::one_hot(hard_labels, classes);
  for (std::size_t i = 0; i < soft_targets.size(); ++i) {
    if (soft_targets[i].size() != classes) {
      throw Error(ErrorCode::InvalidDistribution, "target " + std::to_string(i) + " has wrong length");
    }
    detail::check_distribution(soft_targets[i], i);
    t.insert(t.end(), soft_targets[i].begin(), soft_targets[i].end());
  }
  std::vector<double> w;
  w.reserve(all.size());
  w.insert(w.end(), hard_embeddings.size(), (1.0 - alpha) / static_cast<double>(hard_embeddings.size()));
  w.insert(w.end(), soft_embeddings.size(), alpha / static_cast<double>(soft_embeddings.size()));
  const auto x = detail::flatten(all);
  return detail::fit_head(x, t, w, all.front().dim(), std::move(label_names), config);
}

}  // namespace setfit
