// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#include "dicho/prompt.hpp"

#include <cctype>

#include "dicho/tokenizer.hpp"
#include "json.hpp"

namespace dicho {

namespace {

constexpr char kPartSeparator = '\n';

bool is_alpha_byte(unsigned char c) { return std::isalpha(c) != 0 || c >= 0x80; }

std::string lower_ascii(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

std::string rtrim(std::string s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) {
    s.pop_back();
  }
  return s;
}

std::string ltrim(std::string s) {
  std::size_t i = 0;
  while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) {
    ++i;
  }
  return s.substr(i);
}

std::string render_parts(const std::vector<PromptPart>& parts) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) {
      out += kPartSeparator;
    }
    out += parts[i].content;
  }
  return out;
}

std::string replace_all(std::string s, const std::string& from, const std::string& to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

// Strips a leading ```lang line and a trailing ``` line, if present.
std::string strip_code_fences(const std::string& raw, bool& stripped) {
  stripped = false;
  std::string s = ltrim(rtrim(raw));
  if (s.rfind("```", 0) != 0) {
    return s;
  }
  stripped = true;
  std::size_t nl = s.find('\n');
  s = (nl == std::string::npos) ? std::string() : s.substr(nl + 1);
  s = rtrim(s);
  if (s.size() >= 3 && s.compare(s.size() - 3, 3, "```") == 0) {
    s = rtrim(s.substr(0, s.size() - 3));
  }
  return s;
}

}  // namespace

void AnswerLexicon::validate() const {
  if (yes_forms.empty() || no_forms.empty()) {
    throw ValidationError("lexicon: yes_forms and no_forms must both be non-empty");
  }
  for (const auto& f : yes_forms) {
    if (no_forms.count(f) != 0) {
      throw ValidationError("lexicon: form '" + f + "' appears in both yes_forms and no_forms");
    }
    if (f.empty() || f != lower_ascii(f)) {
      throw ValidationError("lexicon: form '" + f + "' must be non-empty lowercase");
    }
  }
  for (const auto& f : no_forms) {
    if (f.empty() || f != lower_ascii(f)) {
      throw ValidationError("lexicon: form '" + f + "' must be non-empty lowercase");
    }
  }
  if (yes_forms.count(lower_ascii(canonical_yes)) == 0) {
    throw ValidationError("lexicon: canonical_yes '" + canonical_yes + "' not in yes_forms");
  }
  if (no_forms.count(lower_ascii(canonical_no)) == 0) {
    throw ValidationError("lexicon: canonical_no '" + canonical_no + "' not in no_forms");
  }
}

AnswerLexicon default_lexicon() {
  AnswerLexicon lex;
  lex.yes_forms = {"yes", "tak"};
  lex.no_forms = {"no", "nie"};
  lex.canonical_yes = "Yes";
  lex.canonical_no = "No";
  return lex;
}

const char* to_string(JsonFailure f) {
  switch (f) {
    case JsonFailure::syntax:
      return "syntax";
    case JsonFailure::missing_label:
      return "missing_label";
    case JsonFailure::wrong_type:
      return "wrong_type";
    default:
      return "none";
  }
}

const std::string& default_dichotomic_instruction() {
  static const std::string kInstr =
      "You are given a text and a question about that text. Read the text carefully, "
      "consider its tone and content, and answer the question about the text. Respond "
      "with a single word: Yes or No. Do not explain your answer.";
  return kInstr;
}

const std::string& default_json_instruction_template() {
  static const std::string kTemplate =
      "Your task is to identify emotions evoked by the given text.\n"
      "1. For each emotion in the list: {LABELS}, assess whether the text evokes it "
      "(true/false).\n"
      "2. Assess the overall tone of the text as one or more of: Positive, Negative, "
      "Neutral.\n"
      "The tone does not have to be exclusive. You may assign true to multiple options.\n"
      "Return only a JSON object containing a true/false value for every listed emotion "
      "and tone key.\n"
      "Text: {{text}}";
  return kTemplate;
}

Prompt build_dichotomic_prompt(const Document& doc, const LabelSpec& label, LayoutCase layout,
                               const std::string& instruction) {
  if (instruction.empty()) {
    throw ValidationError("build_dichotomic_prompt: instruction is empty");
  }
  PromptPart instr{PartRole::instruction, instruction};
  PromptPart text{PartRole::text, doc.text};
  PromptPart dim{PartRole::dimension,
                 "Question: " + label.question_template + " Answer Yes or No."};

  Prompt p;
  p.strategy = Strategy::dichotomic;
  p.doc_id = doc.id;
  p.target_label = label.name;
  switch (layout) {
    case LayoutCase::case1:
      p.parts = {instr, dim, text};
      p.shared_prefix_token_len = count_tokens(instr.content);
      break;
    case LayoutCase::case2:
      p.parts = {text, dim, instr};
      p.shared_prefix_token_len = count_tokens(text.content);
      break;
    case LayoutCase::case3:
      p.parts = {text, instr, dim};
      p.shared_prefix_token_len = count_tokens(text.content) + count_tokens(instr.content);
      break;
  }
  p.rendered = render_parts(p.parts);
  return p;
}

Prompt build_json_prompt(const Document& doc, const Taxonomy& taxonomy,
                         const std::string& instruction_template) {
  static const std::string kLabelsPh = "{LABELS}";
  static const std::string kTextPh = "{{text}}";
  if (instruction_template.find(kLabelsPh) == std::string::npos) {
    throw ValidationError("build_json_prompt: template missing {LABELS} placeholder");
  }
  const std::size_t text_pos = instruction_template.find(kTextPh);
  if (text_pos == std::string::npos) {
    throw ValidationError("build_json_prompt: template missing {{text}} placeholder");
  }
  std::string prefix = rtrim(instruction_template.substr(0, text_pos));
  std::string suffix = ltrim(instruction_template.substr(text_pos + kTextPh.size()));
  const std::string names = taxonomy.joined_names();
  prefix = replace_all(std::move(prefix), kLabelsPh, names);
  suffix = replace_all(std::move(suffix), kLabelsPh, names);

  Prompt p;
  p.strategy = Strategy::json;
  p.doc_id = doc.id;
  p.parts.push_back({PartRole::instruction, prefix});
  p.parts.push_back({PartRole::text, doc.text});
  if (!suffix.empty()) {
    p.parts.push_back({PartRole::schema, suffix});
  }
  p.shared_prefix_token_len = count_tokens(prefix);
  p.rendered = render_parts(p.parts);
  return p;
}

std::optional<bool> try_parse_dichotomic_answer(std::string_view raw,
                                                const AnswerLexicon& lexicon) {
  std::size_t i = 0;
  while (i < raw.size() && !is_alpha_byte(static_cast<unsigned char>(raw[i]))) {
    ++i;
  }
  if (i == raw.size()) {
    return std::nullopt;
  }
  std::string token;
  while (i < raw.size() && is_alpha_byte(static_cast<unsigned char>(raw[i]))) {
    token += static_cast<char>(std::tolower(static_cast<unsigned char>(raw[i])));
    ++i;
  }
  if (lexicon.yes_forms.count(token) != 0) {
    return true;
  }
  if (lexicon.no_forms.count(token) != 0) {
    return false;
  }
  return std::nullopt;
}

bool parse_dichotomic_answer(std::string_view raw, const AnswerLexicon& lexicon) {
  auto v = try_parse_dichotomic_answer(raw, lexicon);
  if (!v.has_value()) {
    throw UnparseableAnswer("unparseable dichotomic answer: '" + std::string(raw.substr(0, 64)) +
                            "'");
  }
  return *v;
}

JsonAnswer parse_json_answer_detail(const std::string& raw, const Taxonomy& taxonomy) {
  JsonAnswer out;
  const std::string body = strip_code_fences(raw, out.fence_stripped);
  nlohmann::json obj;
  try {
    obj = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    out.failure = JsonFailure::syntax;
    out.detail = e.what();
    return out;
  }
  if (!obj.is_object()) {
    out.failure = JsonFailure::wrong_type;
    out.detail = "top-level value is not an object";
    return out;
  }
  LabelVector labels(taxonomy.K());
  for (std::size_t i = 0; i < taxonomy.K(); ++i) {
    const std::string& name = taxonomy.label(i).name;
    auto it = obj.find(name);
    if (it == obj.end()) {
      out.failure = JsonFailure::missing_label;
      out.detail = "label '" + name + "' absent from response";
      return out;
    }
    if (!it->is_boolean()) {
      out.failure = JsonFailure::wrong_type;
      out.detail = "label '" + name + "' has non-boolean value " + it->dump();
      return out;
    }
    labels.set(i, it->get<bool>());
  }
  for (const auto& [key, value] : obj.items()) {
    (void)value;
    if (!taxonomy.index_of(key).has_value()) {
      ++out.extra_keys;
    }
  }
  out.labels = std::move(labels);
  return out;
}

LabelVector parse_json_answer(const std::string& raw, const Taxonomy& taxonomy) {
  JsonAnswer ans = parse_json_answer_detail(raw, taxonomy);
  switch (ans.failure) {
    case JsonFailure::syntax:
      throw JsonSyntaxError(ans.detail);
    case JsonFailure::missing_label:
      throw MissingLabelError(ans.detail);
    case JsonFailure::wrong_type:
      throw JsonTypeError(ans.detail);
    case JsonFailure::none:
      break;
  }
  return *ans.labels;
}

std::string render_json_object(const Taxonomy& taxonomy, const LabelVector& labels) {
  if (labels.size() != taxonomy.K()) {
    throw ContractViolation("render_json_object: label vector size mismatch");
  }
  if (!labels.is_complete()) {
    throw ContractViolation("render_json_object: label vector has unassigned cells");
  }
  nlohmann::ordered_json obj;
  for (std::size_t i = 0; i < taxonomy.K(); ++i) {
    obj[taxonomy.label(i).name] = *labels[i];
  }
  return obj.dump();
}

}  // namespace dicho
