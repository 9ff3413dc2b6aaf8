// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "dicho/common.hpp"

namespace dicho {

/// One input text. `meta` is a free-form string map (source, topic, context
/// conventions); it is carried through exports untouched.
struct Document {
  std::string id;
  std::string text;
  std::map<std::string, std::string> meta;
};

enum class PolarityGroup { none, emotion, tone };

struct LabelSpec {
  std::string name;
  std::string question_template;  // dichotomic question phrasing, no placeholders
  PolarityGroup polarity_group = PolarityGroup::none;
};

/// Ordered label set. The label order is load order and fixes the column
/// order of every matrix in the pipeline.
class Taxonomy {
 public:
  Taxonomy() = default;
  explicit Taxonomy(std::vector<LabelSpec> labels);

  std::size_t K() const { return labels_.size(); }
  const std::vector<LabelSpec>& labels() const { return labels_; }
  const LabelSpec& label(std::size_t i) const { return labels_.at(i); }

  /// Index of a label name, or nullopt if unknown.
  std::optional<std::size_t> index_of(const std::string& name) const;

  /// Comma-separated label names, in taxonomy order.
  std::string joined_names() const;

 private:
  std::vector<LabelSpec> labels_;
  std::map<std::string, std::size_t> index_;
};

/// One row of binary labels aligned to a taxonomy. Cells may be unset: a
/// parse failure leaves an annotation cell missing, and a consensus with no
/// valid votes abstains. Fully-set rows are the common case.
class LabelVector {
 public:
  LabelVector() = default;
  explicit LabelVector(std::size_t k) : values_(k) {}
  LabelVector(std::initializer_list<std::optional<bool>> init) : values_(init) {}

  std::size_t size() const { return values_.size(); }
  const std::optional<bool>& operator[](std::size_t i) const { return values_.at(i); }
  void set(std::size_t i, std::optional<bool> v) { values_.at(i) = v; }
  bool is_complete() const;
  std::size_t count_true() const;

  bool operator==(const LabelVector& other) const { return values_ == other.values_; }

 private:
  std::vector<std::optional<bool>> values_;
};

/// One annotation pass over a corpus.
struct AnnotationRun {
  int run_id = 0;
  std::map<std::string, LabelVector> rows;  // document id -> labels
};

/// Rows keyed by document id; shared by predictions, gold and consensus views.
using LabelRows = std::map<std::string, LabelVector>;

// -- loading / saving ---------------------------------------------------------

/// Reads a taxonomy config (JSON: {"labels": [{"name", "question_template",
/// "polarity_group"?}, ...]}). Throws ValidationError with the offending
/// field/position on malformed entries or duplicate names.
Taxonomy load_taxonomy(const std::string& path);
Taxonomy parse_taxonomy(const std::string& json_text, const std::string& origin = "<string>");

/// Reads a JSONL corpus ({"id","text","meta"?} per line). Line numbers are
/// reported on malformed lines; duplicate ids name both lines.
std::vector<Document> load_corpus(const std::string& path);
std::vector<Document> parse_corpus(const std::string& jsonl_text, const std::string& origin = "<string>");

/// Writes the corpus back as JSONL; load_corpus(save_corpus(c)) == c.
void save_corpus(const std::vector<Document>& corpus, const std::string& path);
std::string corpus_to_jsonl(const std::vector<Document>& corpus);

const char* to_string(PolarityGroup g);

}  // namespace dicho
