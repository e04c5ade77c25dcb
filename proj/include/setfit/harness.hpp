#pragma once

// Experiment orchestration: repeated few-shot splits with mean/std
// reporting, distillation curves, and cost tables.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <iomanip>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <nlohmann/json.hpp>

#include "setfit/corpus.hpp"
#include "setfit/cost.hpp"
#include "setfit/distill.hpp"
#include "setfit/metrics.hpp"
#include "setfit/pipeline.hpp"
#include "setfit/serialize.hpp"

namespace setfit {

inline constexpr std::string_view kToolVersion = "0.1.0";
inline constexpr std::string_view kReportSchema = "setfit-desk-report/1";

/// Runs task(i) for i in [0, n) on up to `threads` workers (0 = hardware
/// concurrency). Results land at their index; the lowest-index failure is
/// rethrown.
template <class R>
std::vector<R> parallel_map(std::size_t n, std::size_t threads, const std::function<R(std::size_t)>& task) {
  std::vector<R> results(n);
  std::vector<std::exception_ptr> errors(n);
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, n);
  const auto run = [&](std::size_t i) {
    try {
      results[i] = task(i);
    } catch (...) {
      errors[i] = std::current_exception();
    }
  };
  if (threads <= 1) {
    for (std::size_t i = 0; i < n; ++i) run(i);
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(threads);
    for (std::size_t w = 0; w < threads; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < n; i += threads) run(i);
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return results;
}

struct Summary {
  double mean = 0.0;
  double std = 0.0;
};

/// Mean and sample (n - 1) standard deviation; std is 0 for a single value.
inline Summary summarize(std::span<const double> xs) {
  Summary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (const double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double sq = 0.0;
    for (const double x : xs) sq += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(sq / static_cast<double>(xs.size() - 1));
  }
  return s;
}

inline double evaluate(const Model& model, const Dataset& test, metrics::Metric metric) {
  if (test.label_names() != model.label_names) {
    throw Error(ErrorCode::InvalidArgument, "test label names differ from the model's");
  }
  const auto gold = test.labels();
  const auto texts = test.texts();
  if (metric == metrics::Metric::AveragePrecision) {
    if (model.label_names.size() != 2) throw Error(ErrorCode::NonBinary, "average precision needs a binary model");
    std::vector<double> scores;
    scores.reserve(texts.size());
    for (const auto& t : texts) scores.push_back(predict_proba(model, t)[1]);
    return metrics::average_precision(scores, gold);
  }
  const auto pred = predict_all(model, texts);
  switch (metric) {
    case metrics::Metric::Mcc: return metrics::mcc(pred, gold);
    case metrics::Metric::MaeX100: return metrics::mae_x100(pred, gold);
    default: return metrics::accuracy(pred, gold);
  }
}

struct ExperimentConfig {
  std::string train_path;
  std::string test_path;
  metrics::Metric metric = metrics::Metric::Accuracy;
  std::vector<std::size_t> n_per_class{8};
  std::size_t n_splits = 10;
  std::uint64_t base_seed = 0;
  FitConfig fit;
  std::size_t threads = 0;
};

struct SweepEntry {
  std::size_t n_per_class = 0;
  std::vector<double> scores;
  double mean = 0.0;
  double std = 0.0;

  friend bool operator==(const SweepEntry&, const SweepEntry&) = default;
};

struct ExperimentReport {
  std::string schema{kReportSchema};
  std::string tool_version{kToolVersion};
  std::string prng{kPrngName};
  std::string metric;
  nlohmann::json config;
  std::vector<SweepEntry> entries;
};

/// Fit configuration used for split `index`: every seed stream is derived
/// from the split seed so splits are independent.
inline FitConfig split_fit_config(const FitConfig& base, std::uint64_t base_seed, std::size_t index) {
  auto cfg = base;
  cfg.with_master_seed(derive_split_seed(base_seed ^ base.master_seed, index));
  return cfg;
}

inline nlohmann::json config_to_json(const ExperimentConfig& c) {
  return {{"train", c.train_path},         {"test", c.test_path},   {"metric", metrics::to_string(c.metric)},
          {"n_per_class", c.n_per_class}, {"n_splits", c.n_splits}, {"base_seed", c.base_seed},
          {"fit", c.fit}};
}

inline ExperimentReport run_experiment(const Dataset& train, const Dataset& test, const ExperimentConfig& config) {
  if (config.n_splits == 0) throw Error(ErrorCode::InvalidArgument, "n_splits must be at least 1");
  ExperimentReport report;
  report.metric = std::string(metrics::to_string(config.metric));
  report.config = config_to_json(config);
  for (const auto n : config.n_per_class) {
    SweepEntry entry;
    entry.n_per_class = n;
    entry.scores = parallel_map<double>(config.n_splits, config.threads, [&](std::size_t i) {
      try {
        const auto split = sample_few_shot(train, n, derive_split_seed(config.base_seed, i));
        const auto model = fit(split, split_fit_config(config.fit, config.base_seed, i));
        return evaluate(model, test, config.metric);
      } catch (const Error& e) {
        e.rethrow_with_context("n_per_class " + std::to_string(n) + ", split " + std::to_string(i));
      }
    });
    const auto s = summarize(entry.scores);
    entry.mean = s.mean;
    entry.std = s.std;
    report.entries.push_back(std::move(entry));
  }
  return report;
}

inline nlohmann::json to_json(const ExperimentReport& r) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : r.entries) {
    entries.push_back({{"n_per_class", e.n_per_class}, {"scores", e.scores}, {"mean", e.mean}, {"std", e.std}});
  }
  return {{"schema", r.schema}, {"tool_version", r.tool_version}, {"prng", r.prng},
          {"metric", r.metric}, {"config", r.config},             {"results", entries}};
}

inline std::string to_csv(const ExperimentReport& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "n_per_class,split,score\n";
  for (const auto& e : r.entries) {
    for (std::size_t i = 0; i < e.scores.size(); ++i) out << e.n_per_class << ',' << i << ',' << e.scores[i] << '\n';
  }
  return out.str();
}

inline std::string to_text(const ExperimentReport& r) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(4);
  out << r.metric << " over " << (r.entries.empty() ? 0 : r.entries.front().scores.size()) << " split(s)\n";
  for (const auto& e : r.entries) {
    out << "  n_per_class=" << e.n_per_class << "  mean=" << e.mean << "  std=" << e.std << '\n';
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Distillation curve

struct DistillCurveConfig {
  std::vector<std::size_t> unlabeled_sizes{8, 200};
  std::size_t teacher_n_per_class = 16;
  std::size_t n_splits = 10;
  std::uint64_t base_seed = 0;
  /// Unlabeled similarity pairs per unlabeled text (M = round(N * ratio)).
  double pairs_per_text = 1.0;
  FitConfig teacher;
  DistillConfig student;
  metrics::Metric metric = metrics::Metric::Accuracy;
  std::size_t threads = 0;
};

struct CurvePoint {
  std::size_t n_unlabeled = 0;
  std::size_t pairs = 0;
  std::vector<double> scores;
  double mean = 0.0;
  double std = 0.0;
};

struct DistillCurveReport {
  std::string schema{kReportSchema};
  std::string tool_version{kToolVersion};
  std::string prng{kPrngName};
  std::string metric;
  std::vector<CurvePoint> points;
};

/// For every split: sample the labeled set, fit a teacher on it, then distill
/// one student per unlabeled-set size. The unlabeled pool is shuffled once per
/// split and each size takes a prefix, so larger sets contain smaller ones.
inline DistillCurveReport run_distill_curve(const Dataset& train, const Dataset& test,
                                            std::span<const std::string> unlabeled_pool,
                                            const DistillCurveConfig& config) {
  if (config.n_splits == 0) throw Error(ErrorCode::InvalidArgument, "n_splits must be at least 1");
  const std::size_t largest =
      config.unlabeled_sizes.empty() ? 0 : *std::max_element(config.unlabeled_sizes.begin(), config.unlabeled_sizes.end());
  if (largest > unlabeled_pool.size()) {
    throw Error(ErrorCode::TooFewTexts, "unlabeled pool has " + std::to_string(unlabeled_pool.size()) +
                                            " texts, curve needs " + std::to_string(largest));
  }
  const std::size_t n_points = config.unlabeled_sizes.size();

  using SplitScores = std::vector<double>;
  const auto per_split = parallel_map<SplitScores>(config.n_splits, config.threads, [&](std::size_t i) {
    try {
      const auto split_seed = derive_split_seed(config.base_seed, i);
      const auto labeled = sample_few_shot(train, config.teacher_n_per_class, split_seed);
      const auto teacher = fit(labeled, split_fit_config(config.teacher, config.base_seed, i));

      std::vector<std::string> pool(unlabeled_pool.begin(), unlabeled_pool.end());
      auto rng = make_rng(split_seed ^ SeedPlan::kUnlabeledSalt);
      shuffle(std::span<std::string>(pool), rng);

      SplitScores scores;
      for (const auto n : config.unlabeled_sizes) {
        auto dcfg = config.student;
        dcfg.master_seed = split_fit_config(config.teacher, config.base_seed, i).master_seed;
        dcfg.unlabeled_pairs = static_cast<std::size_t>(std::llround(static_cast<double>(n) * config.pairs_per_text));
        const std::span<const std::string> unlabeled(pool.data(), n);
        const auto student = distill(teacher, labeled, unlabeled, dcfg);
        scores.push_back(evaluate(student, test, config.metric));
      }
      return scores;
    } catch (const Error& e) {
      e.rethrow_with_context("distill split " + std::to_string(i));
    }
  });

  DistillCurveReport report;
  report.metric = std::string(metrics::to_string(config.metric));
  for (std::size_t p = 0; p < n_points; ++p) {
    CurvePoint point;
    point.n_unlabeled = config.unlabeled_sizes[p];
    point.pairs = static_cast<std::size_t>(std::llround(static_cast<double>(point.n_unlabeled) * config.pairs_per_text));
    for (const auto& s : per_split) point.scores.push_back(s[p]);
    const auto sum = summarize(point.scores);
    point.mean = sum.mean;
    point.std = sum.std;
    report.points.push_back(std::move(point));
  }
  return report;
}

inline std::string to_csv(const DistillCurveReport& r) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "n_unlabeled,pairs,mean,std\n";
  for (const auto& p : r.points) out << p.n_unlabeled << ',' << p.pairs << ',' << p.mean << ',' << p.std << '\n';
  return out.str();
}

inline nlohmann::json to_json(const DistillCurveReport& r) {
  nlohmann::json pts = nlohmann::json::array();
  for (const auto& p : r.points) {
    pts.push_back({{"n_unlabeled", p.n_unlabeled}, {"pairs", p.pairs}, {"scores", p.scores}, {"mean", p.mean},
                   {"std", p.std}});
  }
  return {{"schema", r.schema}, {"tool_version", r.tool_version}, {"prng", r.prng}, {"metric", r.metric},
          {"points", pts}};
}

// ---------------------------------------------------------------------------
// Cost tables

struct CostRow {
  std::string name;
  cost::CostSpec spec;
  std::optional<double> reported_inference;
  std::optional<double> reported_training;
};

struct CostTableRow {
  std::string name;
  double inference = 0.0;
  double training = 0.0;
  double speedup = 1.0;
  double training_speedup = 1.0;
  std::optional<double> reported_inference;
  std::optional<double> reported_training;
  /// Speed-up computed from the reported figures when both rows carry them.
  std::optional<double> reported_speedup;
  /// False when a reported figure disagrees with the computed one at 2 s.f.
  bool consistent = true;
};

namespace detail {

inline std::size_t line_of_byte(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) line += text[i] == '\n';
  return line;
}

}  // namespace detail

/// Parse `{"rows": [...]}` or a bare array of rows. Each row has name,
/// n_params, seq_len and optionally arch, n_steps, n_batch,
/// reported_inference_flops, reported_training_flops.
inline std::vector<CostRow> parse_cost_spec(const std::string& text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::InvalidSpec, "line " + std::to_string(detail::line_of_byte(text, e.byte)) + ": " + e.what());
  }
  const nlohmann::json& rows = doc.is_object() && doc.contains("rows") ? doc["rows"] : doc;
  if (!rows.is_array() || rows.empty()) throw Error(ErrorCode::InvalidSpec, "expected a non-empty array of rows");
  std::vector<CostRow> out;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& r = rows[i];
    try {
      CostRow row;
      row.name = r.value("name", "row" + std::to_string(i));
      row.spec.n_params = r.at("n_params").get<double>();
      row.spec.seq_len = r.at("seq_len").get<double>();
      row.spec.arch = cost::parse_arch(r.value("arch", std::string("encoder_only")));
      row.spec.n_steps = r.value("n_steps", 1000.0);
      row.spec.n_batch = r.value("n_batch", 8.0);
      if (r.contains("reported_inference_flops")) row.reported_inference = r["reported_inference_flops"].get<double>();
      if (r.contains("reported_training_flops")) row.reported_training = r["reported_training_flops"].get<double>();
      cost::validate(row.spec);
      out.push_back(std::move(row));
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::InvalidSpec, "row " + std::to_string(i) + ": " + e.what());
    } catch (const Error& e) {
      e.rethrow_with_context("row " + std::to_string(i));
    }
  }
  return out;
}

/// Speed-ups are relative to the first row.
inline std::vector<CostTableRow> run_cost_report(std::span<const CostRow> rows) {
  std::vector<CostTableRow> table;
  if (rows.empty()) return table;
  const auto& ref = rows.front();
  for (const auto& r : rows) {
    CostTableRow t;
    t.name = r.name;
    t.inference = cost::inference_flops(r.spec);
    t.training = cost::training_flops(r.spec);
    t.speedup = cost::speedup(ref.spec, r.spec);
    t.training_speedup = cost::training_speedup(ref.spec, r.spec);
    t.reported_inference = r.reported_inference;
    t.reported_training = r.reported_training;
    if (r.reported_inference && ref.reported_inference) t.reported_speedup = *ref.reported_inference / *r.reported_inference;
    if (r.reported_inference && cost::round_sig(t.inference, 2) != cost::round_sig(*r.reported_inference, 2)) {
      t.consistent = false;
    }
    if (r.reported_training && cost::round_sig(t.training, 2) != cost::round_sig(*r.reported_training, 2)) {
      t.consistent = false;
    }
    table.push_back(std::move(t));
  }
  return table;
}

inline std::string cost_table_text(std::span<const CostTableRow> table) {
  std::ostringstream out;
  out << std::left << std::setw(16) << "name" << std::right << std::setw(12) << "inf_flops" << std::setw(12)
      << "train_flops" << std::setw(10) << "speedup" << std::setw(12) << "reported" << "  note\n";
  for (const auto& t : table) {
    std::ostringstream inf, train, sp, rep;
    inf << std::scientific << std::setprecision(2) << t.inference;
    train << std::scientific << std::setprecision(2) << t.training;
    sp << std::fixed << std::setprecision(1) << t.speedup << 'x';
    if (t.reported_speedup) rep << std::fixed << std::setprecision(1) << *t.reported_speedup << 'x';
    out << std::left << std::setw(16) << t.name << std::right << std::setw(12) << inf.str() << std::setw(12)
        << train.str() << std::setw(10) << sp.str() << std::setw(12) << rep.str() << "  "
        << (t.consistent ? "" : "reported figures disagree with computed at 2 s.f.") << '\n';
  }
  return out.str();
}

inline std::string cost_table_csv(std::span<const CostTableRow> table) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "name,inference_flops,training_flops,speedup,training_speedup,reported_inference_flops,"
         "reported_training_flops,reported_speedup,consistent\n";
  const auto opt = [](const std::optional<double>& x) {
    std::ostringstream s;
    s << std::setprecision(17);
    if (x) s << *x;
    return s.str();
  };
  for (const auto& t : table) {
    out << t.name << ',' << t.inference << ',' << t.training << ',' << t.speedup << ',' << t.training_speedup << ','
        << opt(t.reported_inference) << ',' << opt(t.reported_training) << ',' << opt(t.reported_speedup) << ','
        << (t.consistent ? "true" : "false") << '\n';
  }
  return out.str();
}

inline nlohmann::json cost_table_json(std::span<const CostTableRow> table) {
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& t : table) {
    nlohmann::json r = {{"name", t.name},
                        {"inference_flops", t.inference},
                        {"training_flops", t.training},
                        {"speedup", t.speedup},
                        {"training_speedup", t.training_speedup},
                        {"consistent", t.consistent}};
    if (t.reported_inference) r["reported_inference_flops"] = *t.reported_inference;
    if (t.reported_training) r["reported_training_flops"] = *t.reported_training;
    if (t.reported_speedup) r["reported_speedup"] = *t.reported_speedup;
    rows.push_back(std::move(r));
  }
  return {{"schema", kReportSchema}, {"tool_version", kToolVersion}, {"rows", rows}};
}

}  // namespace setfit
