#pragma once

// Reference implementations used only by tests. They share no code with the
// library paths they check: brute-force enumeration, finite differences and
// extended-precision arithmetic.

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include <boost/multiprecision/cpp_bin_float.hpp>

namespace oracle {

using Hp = boost::multiprecision::cpp_bin_float_50;

/// Count unordered pairs {i, j}, i != j, by enumeration.
inline std::uint64_t enumerate_unique_pairs(std::uint64_t k) {
  std::set<std::pair<std::uint64_t, std::uint64_t>> seen;
  for (std::uint64_t i = 0; i < k; ++i) {
    for (std::uint64_t j = 0; j < k; ++j) {
      if (i != j) seen.insert({std::min(i, j), std::max(i, j)});
    }
  }
  return seen.size();
}

inline double cosine_hp(const std::vector<double>& u, const std::vector<double>& v) {
  Hp dot = 0, uu = 0, vv = 0;
  for (std::size_t k = 0; k < u.size(); ++k) {
    dot += Hp(u[k]) * Hp(v[k]);
    uu += Hp(u[k]) * Hp(u[k]);
    vv += Hp(v[k]) * Hp(v[k]);
  }
  return static_cast<double>(dot / boost::multiprecision::sqrt(uu * vv));
}

/// Central difference of f along every coordinate of x.
inline std::vector<double> central_difference(const std::function<double(const std::vector<double>&)>& f,
                                              std::vector<double> x, double h) {
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double orig = x[i];
    x[i] = orig + h;
    const double fp = f(x);
    x[i] = orig - h;
    const double fm = f(x);
    x[i] = orig;
    g[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// max_i |a_i - b_i| / max(|a|_inf, |b|_inf, floor)
inline double relative_error(const std::vector<double>& a, const std::vector<double>& b, double floor = 1e-8) {
  double num = 0.0, scale = floor;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num = std::max(num, std::abs(a[i] - b[i]));
    scale = std::max({scale, std::abs(a[i]), std::abs(b[i])});
  }
  return num / scale;
}

inline double accuracy(const std::vector<std::size_t>& p, const std::vector<std::size_t>& g) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (p[i] == g[i]) ++n;
  }
  return static_cast<double>(n) / static_cast<double>(p.size());
}

/// MCC from the definition with exact integer counts and a 50-digit sqrt.
inline double mcc(const std::vector<std::size_t>& p, const std::vector<std::size_t>& g) {
  std::int64_t tp = 0, tn = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    tp += p[i] == 1 && g[i] == 1;
    tn += p[i] == 0 && g[i] == 0;
    fp += p[i] == 1 && g[i] == 0;
    fn += p[i] == 0 && g[i] == 1;
  }
  const Hp den = Hp(tp + fp) * Hp(tp + fn) * Hp(tn + fp) * Hp(tn + fn);
  if (den == 0) return 0.0;
  return static_cast<double>(Hp(tp * tn - fp * fn) / boost::multiprecision::sqrt(den));
}

inline double mcc_counts(std::int64_t tp, std::int64_t tn, std::int64_t fp, std::int64_t fn) {
  const Hp den = Hp(tp + fp) * Hp(tp + fn) * Hp(tn + fp) * Hp(tn + fn);
  if (den == 0) return 0.0;
  return static_cast<double>(Hp(tp * tn - fp * fn) / boost::multiprecision::sqrt(den));
}

inline double mae_x100(const std::vector<std::size_t>& p, const std::vector<std::size_t>& g) {
  std::int64_t s = 0;
  for (std::size_t i = 0; i < p.size(); ++i) s += std::llabs(static_cast<std::int64_t>(p[i]) - static_cast<std::int64_t>(g[i]));
  return 100.0 * static_cast<double>(s) / static_cast<double>(p.size());
}

/// Brute force: for every distinct score s (descending), predict positive
/// iff score >= s, compute precision and recall, and sum
/// (R_k - R_{k-1}) * P_k.
inline double average_precision(const std::vector<double>& scores, const std::vector<std::size_t>& gold) {
  std::set<double, std::greater<>> thresholds(scores.begin(), scores.end());
  std::size_t positives = 0;
  for (auto g : gold) positives += g;
  double ap = 0.0, prev_recall = 0.0;
  for (const double t : thresholds) {
    std::size_t tp = 0, predicted = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
      if (scores[i] >= t) {
        ++predicted;
        tp += gold[i];
      }
    }
    const double recall = static_cast<double>(tp) / static_cast<double>(positives);
    const double precision = static_cast<double>(tp) / static_cast<double>(predicted);
    ap += (recall - prev_recall) * precision;
    prev_recall = recall;
  }
  return ap;
}

/// Matrix-vector product W v + b in 50-digit arithmetic.
inline std::vector<double> affine_hp(const std::vector<float>& w, const std::vector<float>& b,
                                     const std::vector<double>& v) {
  const std::size_t d = v.size();
  std::vector<double> out(b.size());
  for (std::size_t c = 0; c < b.size(); ++c) {
    Hp acc = Hp(b[c]);
    for (std::size_t k = 0; k < d; ++k) acc += Hp(w[c * d + k]) * Hp(v[k]);
    out[c] = static_cast<double>(acc);
  }
  return out;
}

}  // namespace oracle
