#pragma once

// Labeled text datasets: loading from JSONL/CSV, validation, and few-shot
// split sampling.

#include <algorithm>
#include <cctype>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "setfit/error.hpp"
#include "setfit/rng.hpp"

namespace setfit {

struct LabeledExample {
  std::string text;
  std::size_t label = 0;

  friend bool operator==(const LabeledExample&, const LabeledExample&) = default;
};

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return s;
}

inline bool all_digits(std::string_view s) {
  return !s.empty() && std::all_of(s.begin(), s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace detail

class Dataset {
 public:
  Dataset() = default;

  /// Validates every invariant; throws on the first violation.
  Dataset(std::vector<LabeledExample> examples, std::vector<std::string> label_names)
      : examples_(std::move(examples)), label_names_(std::move(label_names)) {
    validate();
  }

  const std::vector<LabeledExample>& examples() const noexcept { return examples_; }
  const std::vector<std::string>& label_names() const noexcept { return label_names_; }
  std::size_t size() const noexcept { return examples_.size(); }
  bool empty() const noexcept { return examples_.empty(); }
  std::size_t class_count() const noexcept { return label_names_.size(); }

  /// Example indices grouped by class, each group in dataset order.
  std::vector<std::vector<std::size_t>> indices_by_class() const {
    std::vector<std::vector<std::size_t>> groups(class_count());
    for (std::size_t i = 0; i < examples_.size(); ++i) groups[examples_[i].label].push_back(i);
    return groups;
  }

  std::vector<std::string> texts() const {
    std::vector<std::string> out;
    out.reserve(examples_.size());
    for (const auto& e : examples_) out.push_back(e.text);
    return out;
  }

  std::vector<std::size_t> labels() const {
    std::vector<std::size_t> out;
    out.reserve(examples_.size());
    for (const auto& e : examples_) out.push_back(e.label);
    return out;
  }

  friend bool operator==(const Dataset&, const Dataset&) = default;

 private:
  void validate() const {
    if (label_names_.empty()) throw Error(ErrorCode::InvalidArgument, "dataset has no label names");
    for (std::size_t i = 0; i < label_names_.size(); ++i) {
      if (label_names_[i].empty()) throw Error(ErrorCode::InvalidArgument, "empty label name");
      for (std::size_t j = 0; j < i; ++j) {
        if (label_names_[i] == label_names_[j]) {
          throw Error(ErrorCode::InvalidArgument, "duplicate label name '" + label_names_[i] + "'");
        }
      }
    }
    for (std::size_t i = 0; i < examples_.size(); ++i) {
      if (examples_[i].label >= label_names_.size()) {
        throw Error(ErrorCode::LabelOutOfRange, "example " + std::to_string(i) + " has label " +
                                                    std::to_string(examples_[i].label) + " but only " +
                                                    std::to_string(label_names_.size()) + " names");
      }
      if (detail::trim(examples_[i].text).empty()) {
        throw Error(ErrorCode::MalformedRecord, "example " + std::to_string(i) + " has empty text");
      }
    }
  }

  std::vector<LabeledExample> examples_;
  std::vector<std::string> label_names_;
};

enum class DatasetFormat { Jsonl, Csv };

namespace detail {

/// A raw record before label resolution: either a label name or an index.
struct RawRecord {
  std::string text;
  std::optional<std::string> label_name;
  std::optional<std::uint64_t> label_index;
  std::size_t line = 0;
};

inline std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::FileNotFound, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::vector<RawRecord> parse_jsonl(const std::string& content) {
  std::vector<RawRecord> records;
  std::istringstream in(content);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const auto malformed = [&](const std::string& why) {
      return Error(ErrorCode::MalformedRecord, "line " + std::to_string(line_no) + ": " + why);
    };
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw malformed(e.what());
    }
    if (!obj.is_object()) throw malformed("expected a JSON object");
    if (!obj.contains("text") || !obj["text"].is_string()) throw malformed("missing string field 'text'");
    if (!obj.contains("label")) throw malformed("missing field 'label'");
    RawRecord rec;
    rec.text = obj["text"].get<std::string>();
    rec.line = line_no;
    const auto& label = obj["label"];
    if (label.is_string()) {
      rec.label_name = label.get<std::string>();
    } else if (label.is_number_unsigned() || (label.is_number_integer() && label.get<std::int64_t>() >= 0)) {
      rec.label_index = label.get<std::uint64_t>();
    } else {
      throw malformed("'label' must be a string or a non-negative integer");
    }
    records.push_back(std::move(rec));
  }
  return records;
}

/// RFC-4180 record splitter. Returns each record's fields and its first line.
inline std::vector<std::pair<std::vector<std::string>, std::size_t>> split_csv(const std::string& content) {
  std::vector<std::pair<std::vector<std::string>, std::size_t>> rows;
  std::vector<std::string> fields;
  std::string field;
  bool in_quotes = false;
  bool field_was_quoted = false;
  std::size_t line = 1;
  std::size_t record_line = 1;
  bool record_has_content = false;

  const auto end_field = [&] {
    fields.push_back(std::move(field));
    field.clear();
    field_was_quoted = false;
  };
  const auto end_record = [&] {
    end_field();
    if (record_has_content || fields.size() > 1 || !fields.front().empty()) {
      rows.emplace_back(std::move(fields), record_line);
    }
    fields.clear();
    record_has_content = false;
  };

  for (std::size_t i = 0; i < content.size(); ++i) {
    const char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        if (!field.empty() || field_was_quoted) {
          throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": stray quote");
        }
        in_quotes = true;
        field_was_quoted = true;
        record_has_content = true;
        break;
      case ',':
        end_field();
        record_has_content = true;
        break;
      case '\r':
        break;
      case '\n':
        end_record();
        ++line;
        record_line = line;
        break;
      default:
        if (field_was_quoted) {
          throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": text after closing quote");
        }
        field.push_back(c);
        record_has_content = true;
    }
  }
  if (in_quotes) throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(record_line) + ": unterminated quote");
  if (record_has_content || !field.empty()) end_record();
  return rows;
}

inline std::vector<RawRecord> parse_csv(const std::string& content) {
  auto rows = split_csv(content);
  if (rows.empty()) return {};
  const auto& header = rows.front().first;
  std::optional<std::size_t> text_col, label_col;
  for (std::size_t i = 0; i < header.size(); ++i) {
    const auto name = trim(header[i]);
    if (name == "text") text_col = i;
    if (name == "label") label_col = i;
  }
  if (!text_col || !label_col) {
    throw Error(ErrorCode::MalformedRecord, "line 1: CSV header must name columns 'text' and 'label'");
  }
  std::vector<RawRecord> records;
  for (std::size_t r = 1; r < rows.size(); ++r) {
    const auto& [fields, line] = rows[r];
    if (fields.size() != header.size()) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": expected " +
                                                  std::to_string(header.size()) + " fields, got " +
                                                  std::to_string(fields.size()));
    }
    RawRecord rec;
    rec.text = fields[*text_col];
    rec.line = line;
    const std::string label(trim(fields[*label_col]));
    if (label.empty()) throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(line) + ": empty label");
    if (all_digits(label) && label.size() < 19) {
      rec.label_index = std::stoull(label);
    } else {
      rec.label_name = label;
    }
    records.push_back(std::move(rec));
  }
  return records;
}

inline Dataset resolve_labels(std::vector<RawRecord> records, std::optional<std::vector<std::string>> declared) {
  if (records.empty()) throw Error(ErrorCode::EmptyDataset, "no records");

  std::vector<std::string> names;
  std::unordered_map<std::string, std::size_t> name_index;
  if (declared) {
    names = *declared;
    for (std::size_t i = 0; i < names.size(); ++i) name_index.emplace(names[i], i);
  } else {
    // Names in first-appearance order; bare indices without any names get
    // their decimal spelling so the ordinal value survives.
    std::uint64_t max_index = 0;
    bool any_index = false;
    for (const auto& r : records) {
      if (r.label_name && !name_index.contains(*r.label_name)) {
        name_index.emplace(*r.label_name, names.size());
        names.push_back(*r.label_name);
      }
      if (r.label_index) {
        any_index = true;
        max_index = std::max(max_index, *r.label_index);
      }
    }
    if (names.empty() && any_index) {
      for (std::uint64_t i = 0; i <= max_index; ++i) {
        name_index.emplace(std::to_string(i), names.size());
        names.push_back(std::to_string(i));
      }
    }
  }

  std::vector<LabeledExample> examples;
  examples.reserve(records.size());
  for (auto& r : records) {
    if (trim(r.text).empty()) {
      throw Error(ErrorCode::MalformedRecord, "line " + std::to_string(r.line) + ": text is empty after trimming");
    }
    std::size_t label = 0;
    if (r.label_name) {
      const auto it = name_index.find(*r.label_name);
      if (it == name_index.end()) {
        throw Error(ErrorCode::LabelOutOfRange,
                    "line " + std::to_string(r.line) + ": unknown label name '" + *r.label_name + "'");
      }
      label = it->second;
    } else {
      if (*r.label_index >= names.size()) {
        throw Error(ErrorCode::LabelOutOfRange, "line " + std::to_string(r.line) + ": label index " +
                                                    std::to_string(*r.label_index) + " but only " +
                                                    std::to_string(names.size()) + " label names");
      }
      label = static_cast<std::size_t>(*r.label_index);
    }
    examples.push_back({std::move(r.text), label});
  }
  return Dataset(std::move(examples), std::move(names));
}

}  // namespace detail

/// Parse a dataset from an in-memory buffer.
inline Dataset parse_dataset(const std::string& content, DatasetFormat format,
                             std::optional<std::vector<std::string>> label_names = std::nullopt) {
  auto records = format == DatasetFormat::Jsonl ? detail::parse_jsonl(content) : detail::parse_csv(content);
  return detail::resolve_labels(std::move(records), std::move(label_names));
}

/// Load a JSONL or CSV dataset. Label names, when not supplied, are collected
/// in first-appearance order.
inline Dataset load_dataset(const std::filesystem::path& path, DatasetFormat format,
                            std::optional<std::vector<std::string>> label_names = std::nullopt) {
  if (!std::filesystem::exists(path)) throw Error(ErrorCode::FileNotFound, "'" + path.string() + "' does not exist");
  return parse_dataset(detail::read_file(path), format, std::move(label_names));
}

/// Picks the format from the file extension (".csv" is CSV, anything else JSONL).
inline Dataset load_dataset(const std::filesystem::path& path) {
  return load_dataset(path, path.extension() == ".csv" ? DatasetFormat::Csv : DatasetFormat::Jsonl);
}

/// As above, with label indices resolved against `label_names`.
inline Dataset load_dataset(const std::filesystem::path& path, std::vector<std::string> label_names) {
  return load_dataset(path, path.extension() == ".csv" ? DatasetFormat::Csv : DatasetFormat::Jsonl,
                      std::move(label_names));
}

/// One {"text":..., "label": <name>} object per line.
inline std::string to_jsonl(const Dataset& data) {
  std::string out;
  for (const auto& e : data.examples()) {
    nlohmann::json obj = {{"text", e.text}, {"label", data.label_names()[e.label]}};
    out += obj.dump();
    out += '\n';
  }
  return out;
}

inline void save_jsonl(const Dataset& data, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::FileNotFound, "cannot write '" + path.string() + "'");
  out << to_jsonl(data);
}

/// Draw exactly `n_per_class` examples of every class without replacement.
/// The result is class-major; within a class examples appear in draw order.
inline Dataset sample_few_shot(const Dataset& source, std::size_t n_per_class, std::uint64_t seed) {
  if (n_per_class == 0) throw Error(ErrorCode::InvalidArgument, "n_per_class must be at least 1");
  auto groups = source.indices_by_class();
  for (std::size_t c = 0; c < groups.size(); ++c) {
    if (groups[c].size() < n_per_class) {
      throw Error(ErrorCode::InsufficientClassSize, "class '" + source.label_names()[c] + "' has " +
                                                        std::to_string(groups[c].size()) + " examples, need " +
                                                        std::to_string(n_per_class));
    }
  }
  auto rng = make_rng(seed);
  std::vector<LabeledExample> picked;
  picked.reserve(n_per_class * groups.size());
  for (auto& group : groups) {
    partial_shuffle(std::span<std::size_t>(group), n_per_class, rng);
    for (std::size_t k = 0; k < n_per_class; ++k) picked.push_back(source.examples()[group[k]]);
  }
  return Dataset(std::move(picked), source.label_names());
}

/// Seed for split `index`: base XOR (index * golden gamma), wrapping.
constexpr std::uint64_t derive_split_seed(std::uint64_t base_seed, std::uint64_t index) {
  return base_seed ^ (index * kGoldenGamma);
}

struct SplitSet {
  std::vector<Dataset> splits;
  std::uint64_t base_seed = 0;
  std::size_t n_per_class = 0;
};

inline SplitSet make_splits(const Dataset& source, std::size_t n_per_class, std::size_t n_splits,
                            std::uint64_t base_seed) {
  if (n_splits == 0) throw Error(ErrorCode::InvalidArgument, "n_splits must be at least 1");
  SplitSet set{{}, base_seed, n_per_class};
  set.splits.reserve(n_splits);
  for (std::size_t i = 0; i < n_splits; ++i) {
    set.splits.push_back(sample_few_shot(source, n_per_class, derive_split_seed(base_seed, i)));
  }
  return set;
}

}  // namespace setfit
