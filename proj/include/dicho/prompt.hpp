// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "dicho/domain.hpp"

namespace dicho {

// Part order per layout:
//   Case1: instruction, dimension, text
//   Case2: text, dimension, instruction
//   Case3: text, instruction, dimension
enum class LayoutCase { case1 = 1, case2 = 2, case3 = 3 };

enum class Strategy { dichotomic, json };

enum class PartRole { instruction, text, dimension, schema };

struct PromptPart {
  PartRole role;
  std::string content;
};

// Parts are joined with a single newline; the toy tokenizer treats the
// separator as whitespace, so token counts are additive across parts.
struct Prompt {
  std::vector<PromptPart> parts;
  std::string rendered;
  std::size_t shared_prefix_token_len = 0;
  Strategy strategy = Strategy::dichotomic;
  std::string doc_id;
  std::string target_label;  // empty for json strategy
};

struct AnswerLexicon {
  std::set<std::string> yes_forms;  // lowercase
  std::set<std::string> no_forms;   // lowercase
  std::string canonical_yes = "Yes";
  std::string canonical_no = "No";

  void validate() const;
};

AnswerLexicon default_lexicon();

class UnparseableAnswer : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class JsonFailure { none, syntax, missing_label, wrong_type };

const char* to_string(JsonFailure f);

struct JsonAnswer {
  std::optional<LabelVector> labels;
  JsonFailure failure = JsonFailure::none;
  std::string detail;
  std::size_t extra_keys = 0;
  bool fence_stripped = false;
};

class JsonSyntaxError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class MissingLabelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class JsonTypeError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const std::string& default_dichotomic_instruction();
const std::string& default_json_instruction_template();

Prompt build_dichotomic_prompt(const Document& doc, const LabelSpec& label, LayoutCase layout,
                               const std::string& instruction);

// The template must contain {LABELS} and {{text}}. Text before the {{text}}
// placeholder becomes the instruction part ({LABELS} interpolated with every
// taxonomy label name); text after it, if any, becomes a schema part.
Prompt build_json_prompt(const Document& doc, const Taxonomy& taxonomy,
                         const std::string& instruction_template);

// First alphabetic token of raw, matched case-insensitively. nullopt when the
// token is outside the lexicon or no token exists.
std::optional<bool> try_parse_dichotomic_answer(std::string_view raw, const AnswerLexicon& lexicon);

// Throwing form of the above; throws UnparseableAnswer.
bool parse_dichotomic_answer(std::string_view raw, const AnswerLexicon& lexicon);

// Strips optional markdown code fences, parses strictly, requires every
// taxonomy label with a boolean value. Extra keys are counted, not errors.
JsonAnswer parse_json_answer_detail(const std::string& raw, const Taxonomy& taxonomy);

// Throwing form: JsonSyntaxError, MissingLabelError, JsonTypeError.
LabelVector parse_json_answer(const std::string& raw, const Taxonomy& taxonomy);

// Renders the completion object for a fully assigned LabelVector, keys in
// taxonomy order. Shared by the oracle backend and the decode-cost estimate.
std::string render_json_object(const Taxonomy& taxonomy, const LabelVector& labels);

}  // namespace dicho
