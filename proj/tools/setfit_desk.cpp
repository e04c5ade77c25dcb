// setfit-desk: command-line front end for training, evaluation, sweeps,
// distillation and cost reports.

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "setfit/setfit.hpp"

namespace fs = std::filesystem;
using namespace setfit;

namespace {

struct FitFlags {
  std::size_t r_pairs = 20;
  std::size_t dim = 64;
  std::size_t vocab_buckets = 65536;
  std::size_t max_len = 256;
  double lr = 1e-3;
  std::size_t batch = 16;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
  bool permissive = false;

  void attach(CLI::App* cmd) {
    cmd->add_option("--r-pairs", r_pairs, "Pairs per class and polarity (R)")->capture_default_str();
    cmd->add_option("--dim", dim, "Embedding dimension")->capture_default_str();
    cmd->add_option("--vocab-buckets", vocab_buckets, "Hash buckets in the embedding table")->capture_default_str();
    cmd->add_option("--max-len", max_len, "Maximum tokens per text")->capture_default_str();
    cmd->add_option("--lr", lr, "Encoder fine-tuning learning rate")->capture_default_str();
    cmd->add_option("--batch", batch, "Encoder fine-tuning batch size")->capture_default_str();
    cmd->add_option("--epochs", epochs, "Encoder fine-tuning epochs (0 freezes the encoder)")->capture_default_str();
    cmd->add_option("--seed", seed, "Master seed")->capture_default_str();
    cmd->add_flag("--permissive", permissive, "Allow singleton classes to self-pair");
  }

  FitConfig config() const {
    FitConfig c;
    c.R = r_pairs;
    c.pair_mode = permissive ? PairMode::Permissive : PairMode::Strict;
    c.encoder = {vocab_buckets, dim, max_len, 0};
    c.finetune.learning_rate = lr;
    c.finetune.batch_size = batch;
    c.finetune.epochs = epochs;
    c.with_master_seed(seed);
    return c;
  }
};

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write '" + out_path + "'");
  out << text;
}

/// JSONL files contribute their "text" fields; anything else is one text per line.
std::vector<std::string> read_texts(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
  const bool jsonl = path.extension() == ".jsonl" || path.extension() == ".json";
  std::vector<std::string> texts;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    if (!jsonl) {
      texts.push_back(line);
      continue;
    }
    try {
      texts.push_back(nlohmann::json::parse(line).at("text").get<std::string>());
    } catch (const nlohmann::json::exception& e) {
      throw Error(ErrorCode::MalformedRecord, path.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return texts;
}

std::string probs_text(const std::vector<double>& p) {
  std::ostringstream s;
  s << std::setprecision(6);
  for (std::size_t i = 0; i < p.size(); ++i) s << (i ? " " : "") << p[i];
  return s.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Few-shot text classification with contrastive sentence-encoder fine-tuning"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(kToolVersion));

  std::string format = "text";
  std::string out_path;
  const auto add_output = [&](CLI::App* cmd, std::vector<std::string> formats) {
    cmd->add_option("--format", format, "Output format")->check(CLI::IsMember(formats))->capture_default_str();
    cmd->add_option("--out", out_path, "Write output to this file instead of stdout");
  };

  // train
  auto* train_cmd = app.add_subcommand("train", "Fit a model on a labeled dataset");
  std::string dataset, test_path, model_out, model_in, unlabeled_path, metric_name = "accuracy";
  std::size_t train_n_per_class = 0;
  FitFlags train_flags;
  train_cmd->add_option("--dataset", dataset, "Training data (.jsonl or .csv)")->required();
  train_cmd->add_option("--model-out", model_out, "Where to write the model")->required();
  train_cmd->add_option("--n-per-class", train_n_per_class, "Sample this many examples per class first (0 = all)");
  train_flags.attach(train_cmd);

  // predict
  auto* predict_cmd = app.add_subcommand("predict", "Predict labels for texts");
  std::vector<std::string> inline_texts;
  predict_cmd->add_option("--model-in", model_in, "Model file")->required();
  predict_cmd->add_option("--dataset", dataset, "Texts to classify (.jsonl with a text field, or one per line)");
  predict_cmd->add_option("texts", inline_texts, "Texts given on the command line");
  add_output(predict_cmd, {"text", "json", "csv"});

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Score a model on a labeled test set");
  eval_cmd->add_option("--model-in", model_in, "Model file")->required();
  eval_cmd->add_option("--test", test_path, "Labeled test data")->required();
  eval_cmd->add_option("--metric", metric_name, "accuracy | mcc | mae_x100 | average_precision")->capture_default_str();
  add_output(eval_cmd, {"text", "json", "csv"});

  // sweep
  auto* sweep_cmd = app.add_subcommand("sweep", "Repeated few-shot splits for one or more sample sizes");
  std::vector<std::size_t> sweep_sizes{8};
  std::size_t splits = 10, threads = 0;
  std::uint64_t split_seed = 0;
  FitFlags sweep_flags;
  sweep_cmd->add_option("--dataset", dataset, "Training pool")->required();
  sweep_cmd->add_option("--test", test_path, "Test set")->required();
  sweep_cmd->add_option("--metric", metric_name, "accuracy | mcc | mae_x100 | average_precision")->capture_default_str();
  sweep_cmd->add_option("--n-per-class", sweep_sizes, "Samples per class (repeatable)")->capture_default_str();
  sweep_cmd->add_option("--splits", splits, "Random training splits per size")->capture_default_str();
  sweep_cmd->add_option("--split-seed", split_seed, "Base seed for split sampling")->capture_default_str();
  sweep_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  sweep_flags.attach(sweep_cmd);
  add_output(sweep_cmd, {"text", "json", "csv"});

  // distill
  auto* distill_cmd = app.add_subcommand("distill", "Distill a teacher model into a smaller student");
  std::size_t pairs_m = 0;
  double alpha = 0.5;
  FitFlags student_flags;
  student_flags.dim = 32;
  distill_cmd->add_option("--model-in", model_in, "Teacher model")->required();
  distill_cmd->add_option("--dataset", dataset, "Labeled data the teacher was trained on")->required();
  distill_cmd->add_option("--unlabeled", unlabeled_path, "Unlabeled texts");
  distill_cmd->add_option("--pairs", pairs_m, "Unlabeled similarity pairs (M)")->capture_default_str();
  distill_cmd->add_option("--alpha", alpha, "Weight of the soft-target loss")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  distill_cmd->add_option("--model-out", model_out, "Where to write the student")->required();
  student_flags.attach(distill_cmd);

  // distill-curve
  auto* curve_cmd = app.add_subcommand("distill-curve", "Student accuracy as a function of unlabeled set size");
  std::vector<std::size_t> curve_sizes{8, 200};
  std::size_t teacher_n = 16, student_dim = 32;
  double pairs_per_text = 1.0;
  FitFlags teacher_flags;
  curve_cmd->add_option("--dataset", dataset, "Labeled training pool")->required();
  curve_cmd->add_option("--test", test_path, "Test set")->required();
  curve_cmd->add_option("--unlabeled", unlabeled_path, "Unlabeled text pool")->required();
  curve_cmd->add_option("--sizes", curve_sizes, "Unlabeled set sizes (repeatable)")->capture_default_str();
  curve_cmd->add_option("--n-per-class", teacher_n, "Labeled samples per class")->capture_default_str();
  curve_cmd->add_option("--splits", splits, "Random splits")->capture_default_str();
  curve_cmd->add_option("--split-seed", split_seed, "Base seed for split sampling")->capture_default_str();
  curve_cmd->add_option("--student-dim", student_dim, "Student embedding dimension")->capture_default_str();
  curve_cmd->add_option("--pairs-per-text", pairs_per_text, "Similarity pairs per unlabeled text")->capture_default_str();
  curve_cmd->add_option("--alpha", alpha, "Weight of the soft-target loss")->check(CLI::Range(0.0, 1.0))->capture_default_str();
  curve_cmd->add_option("--threads", threads, "Worker threads (0 = all cores)");
  teacher_flags.attach(curve_cmd);
  add_output(curve_cmd, {"text", "json", "csv"});

  // cost
  auto* cost_cmd = app.add_subcommand("cost", "FLOPs cost table from a JSON spec file");
  std::string spec_path;
  cost_cmd->add_option("spec", spec_path, "Cost spec JSON")->required()->check(CLI::ExistingFile);
  add_output(cost_cmd, {"text", "json", "csv"});

  // dump-pairs
  auto* pairs_cmd = app.add_subcommand("dump-pairs", "Write the contrastive pair set as JSONL");
  FitFlags pair_flags;
  pairs_cmd->add_option("--dataset", dataset, "Labeled data")->required();
  pairs_cmd->add_option("--out", out_path, "Output file (default stdout)");
  pair_flags.attach(pairs_cmd);

  // gen-synthetic
  auto* gen_cmd = app.add_subcommand("gen-synthetic", "Generate a synthetic labeled corpus");
  SyntheticSpec synth;
  std::string gen_format = "jsonl";
  gen_cmd->add_option("--classes", synth.classes)->capture_default_str();
  gen_cmd->add_option("--n-per-class", synth.examples_per_class)->capture_default_str();
  gen_cmd->add_option("--class-vocab", synth.class_vocab)->capture_default_str();
  gen_cmd->add_option("--shared-vocab", synth.shared_vocab)->capture_default_str();
  gen_cmd->add_option("--shared-fraction", synth.shared_fraction)->capture_default_str();
  gen_cmd->add_option("--label-noise", synth.label_noise)->capture_default_str();
  gen_cmd->add_option("--min-tokens", synth.min_tokens)->capture_default_str();
  gen_cmd->add_option("--max-tokens", synth.max_tokens)->capture_default_str();
  gen_cmd->add_option("--seed", synth.seed)->capture_default_str();
  gen_cmd->add_option("--format", gen_format)->check(CLI::IsMember({"jsonl", "csv"}))->capture_default_str();
  gen_cmd->add_option("--out", out_path, "Output file (default stdout)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train_cmd) {
      auto data = load_dataset(dataset);
      if (train_n_per_class > 0) data = sample_few_shot(data, train_n_per_class, train_flags.seed);
      FitTrace trace;
      const auto model = fit(data, train_flags.config(), &trace);
      save_model(model, model_out);
      std::cerr << "trained on " << data.size() << " examples, " << trace.pair_count << " pairs -> " << model_out
                << '\n';
    } else if (*predict_cmd) {
      const auto model = load_model(model_in);
      auto texts = inline_texts;
      if (!dataset.empty()) {
        const auto more = read_texts(dataset);
        texts.insert(texts.end(), more.begin(), more.end());
      }
      std::ostringstream out;
      nlohmann::json rows = nlohmann::json::array();
      if (format == "csv") out << "label,probabilities\n";
      for (const auto& t : texts) {
        const auto p = predict_proba(model, t);
        const auto label = argmax(p);
        if (format == "json") {
          rows.push_back({{"text", t}, {"label", model.label_names[label]}, {"label_index", label}, {"probabilities", p}});
        } else if (format == "csv") {
          out << model.label_names[label] << ',' << probs_text(p) << '\n';
        } else {
          out << model.label_names[label] << '\t' << probs_text(p) << '\n';
        }
      }
      if (format == "json") out << rows.dump(2) << '\n';
      emit(out.str(), out_path);
    } else if (*eval_cmd) {
      const auto model = load_model(model_in);
      const auto test = load_dataset(test_path, model.label_names);
      const auto metric = metrics::parse_metric(metric_name);
      const double score = evaluate(model, test, metric);
      std::ostringstream out;
      out << std::setprecision(17);
      if (format == "json") {
        out << nlohmann::json{{"metric", metric_name}, {"score", score}, {"n", test.size()}}.dump(2) << '\n';
      } else if (format == "csv") {
        out << "metric,score,n\n" << metric_name << ',' << score << ',' << test.size() << '\n';
      } else {
        out << metric_name << ": " << score << " (" << test.size() << " examples)\n";
      }
      emit(out.str(), out_path);
    } else if (*sweep_cmd) {
      ExperimentConfig cfg;
      cfg.train_path = dataset;
      cfg.test_path = test_path;
      cfg.metric = metrics::parse_metric(metric_name);
      cfg.n_per_class = sweep_sizes;
      cfg.n_splits = splits;
      cfg.base_seed = split_seed;
      cfg.fit = sweep_flags.config();
      cfg.threads = threads;
      const auto train = load_dataset(dataset);
      const auto report = run_experiment(train, load_dataset(test_path, train.label_names()), cfg);
      emit(format == "json" ? to_json(report).dump(2) + "\n" : format == "csv" ? to_csv(report) : to_text(report),
           out_path);
    } else if (*distill_cmd) {
      const auto teacher = load_model(model_in);
      const auto labeled = load_dataset(dataset, teacher.label_names);
      const auto unlabeled = unlabeled_path.empty() ? std::vector<std::string>{} : read_texts(unlabeled_path);
      DistillConfig cfg;
      const auto base = student_flags.config();
      cfg.unlabeled_pairs = pairs_m;
      cfg.R = base.R;
      cfg.pair_mode = base.pair_mode;
      cfg.student = base.encoder;
      cfg.finetune = base.finetune;
      cfg.alpha = alpha;
      cfg.master_seed = student_flags.seed;
      DistillTrace trace;
      const auto student = distill(teacher, labeled, unlabeled, cfg, &trace);
      save_model(student, model_out);
      std::cerr << "student trained on " << trace.labeled_pairs << " labeled + " << trace.similarity_pairs
                << " similarity pairs -> " << model_out << '\n';
    } else if (*curve_cmd) {
      DistillCurveConfig cfg;
      cfg.unlabeled_sizes = curve_sizes;
      cfg.teacher_n_per_class = teacher_n;
      cfg.n_splits = splits;
      cfg.base_seed = split_seed;
      cfg.pairs_per_text = pairs_per_text;
      cfg.teacher = teacher_flags.config();
      cfg.student.R = cfg.teacher.R;
      cfg.student.pair_mode = cfg.teacher.pair_mode;
      cfg.student.student = cfg.teacher.encoder;
      cfg.student.student.dim = student_dim;
      cfg.student.finetune = cfg.teacher.finetune;
      cfg.student.alpha = alpha;
      cfg.threads = threads;
      const auto train = load_dataset(dataset);
      const auto report =
          run_distill_curve(train, load_dataset(test_path, train.label_names()), read_texts(unlabeled_path), cfg);
      std::string text;
      if (format == "json") {
        text = to_json(report).dump(2) + "\n";
      } else if (format == "csv") {
        text = to_csv(report);
      } else {
        std::ostringstream s;
        s << std::fixed << std::setprecision(4);
        for (const auto& p : report.points) {
          s << "N=" << p.n_unlabeled << " pairs=" << p.pairs << " mean=" << p.mean << " std=" << p.std << '\n';
        }
        text = s.str();
      }
      emit(text, out_path);
    } else if (*cost_cmd) {
      const auto rows = parse_cost_spec(detail::read_file(spec_path));
      const auto table = run_cost_report(rows);
      emit(format == "json" ? cost_table_json(table).dump(2) + "\n"
           : format == "csv" ? cost_table_csv(table)
                             : cost_table_text(table),
           out_path);
    } else if (*pairs_cmd) {
      const auto data = load_dataset(dataset);
      const auto cfg = pair_flags.config();
      emit(pairs_to_jsonl(generate_pairs(data, cfg.R, cfg.seeds.pairs, cfg.pair_mode)), out_path);
    } else if (*gen_cmd) {
      const auto data = generate_synthetic(synth);
      if (gen_format == "jsonl") {
        emit(to_jsonl(data), out_path);
      } else {
        std::ostringstream s;
        s << "text,label\n";
        for (const auto& e : data.examples()) s << '"' << e.text << "\"," << data.label_names()[e.label] << '\n';
        emit(s.str(), out_path);
      }
    }
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
