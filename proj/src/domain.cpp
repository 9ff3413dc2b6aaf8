// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#include "dicho/domain.hpp"

#include <fstream>
#include <sstream>

#include "json.hpp"

namespace dicho {

using nlohmann::json;
using nlohmann::ordered_json;

Taxonomy::Taxonomy(std::vector<LabelSpec> labels) : labels_(std::move(labels)) {
  if (labels_.empty()) {
    throw ValidationError("taxonomy: needs at least one label");
  }
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const LabelSpec& spec = labels_[i];
    if (spec.name.empty()) {
      throw ValidationError("taxonomy: label " + std::to_string(i) + " has an empty name");
    }
    if (spec.question_template.empty()) {
      throw ValidationError("taxonomy: label '" + spec.name + "' has an empty question_template");
    }
    auto [it, inserted] = index_.emplace(spec.name, i);
    if (!inserted) {
      throw ValidationError("taxonomy: duplicate label '" + spec.name + "' (entries " +
                            std::to_string(it->second) + " and " + std::to_string(i) + ")");
    }
  }
}

std::optional<std::size_t> Taxonomy::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

std::string Taxonomy::joined_names() const {
  std::string out;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    if (i > 0) {
      out += ", ";
    }
    out += labels_[i].name;
  }
  return out;
}

bool LabelVector::is_complete() const {
  for (const auto& v : values_) {
    if (!v.has_value()) {
      return false;
    }
  }
  return true;
}

std::size_t LabelVector::count_true() const {
  std::size_t n = 0;
  for (const auto& v : values_) {
    if (v.has_value() && *v) {
      ++n;
    }
  }
  return n;
}

const char* to_string(PolarityGroup g) {
  switch (g) {
    case PolarityGroup::emotion:
      return "emotion";
    case PolarityGroup::tone:
      return "tone";
    default:
      return "none";
  }
}

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PolarityGroup parse_polarity(const json& j, const std::string& where) {
  const std::string s = j.get<std::string>();
  if (s == "emotion") {
    return PolarityGroup::emotion;
  }
  if (s == "tone") {
    return PolarityGroup::tone;
  }
  throw ValidationError(where + ": polarity_group must be 'emotion' or 'tone', got '" + s + "'");
}

}  // namespace

Taxonomy parse_taxonomy(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": taxonomy parse error: " + e.what());
  }
  if (!root.is_object() || !root.contains("labels") || !root["labels"].is_array()) {
    throw ValidationError(origin + ": taxonomy config must be an object with a 'labels' array");
  }
  std::vector<LabelSpec> labels;
  std::size_t idx = 0;
  for (const auto& entry : root["labels"]) {
    const std::string where = origin + ": labels[" + std::to_string(idx) + "]";
    if (!entry.is_object() || !entry.contains("name") || !entry["name"].is_string()) {
      throw ValidationError(where + ": missing string field 'name'");
    }
    LabelSpec spec;
    spec.name = entry["name"].get<std::string>();
    if (!entry.contains("question_template") || !entry["question_template"].is_string()) {
      throw ValidationError(where + " ('" + spec.name + "'): missing string field 'question_template'");
    }
    spec.question_template = entry["question_template"].get<std::string>();
    if (entry.contains("polarity_group")) {
      spec.polarity_group = parse_polarity(entry["polarity_group"], where);
    }
    labels.push_back(std::move(spec));
    ++idx;
  }
  return Taxonomy(std::move(labels));
}

Taxonomy load_taxonomy(const std::string& path) {
  return parse_taxonomy(read_file(path), path);
}

std::vector<Document> parse_corpus(const std::string& jsonl_text, const std::string& origin) {
  std::vector<Document> docs;
  std::map<std::string, std::size_t> seen;  // id -> 1-based line
  std::istringstream in(jsonl_text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line.find_first_not_of(" \t\r") == std::string::npos) {
      continue;
    }
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(origin + ":" + std::to_string(lineno) + ": malformed JSON line: " + e.what());
    }
    const std::string where = origin + ":" + std::to_string(lineno);
    if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
        !row.contains("text") || !row["text"].is_string()) {
      throw ValidationError(where + ": document needs string fields 'id' and 'text'");
    }
    Document doc;
    doc.id = row["id"].get<std::string>();
    doc.text = row["text"].get<std::string>();
    if (doc.id.empty()) {
      throw ValidationError(where + ": document id is empty");
    }
    if (doc.text.empty()) {
      throw ValidationError(where + ": document '" + doc.id + "' has empty text");
    }
    if (row.contains("meta")) {
      if (!row["meta"].is_object()) {
        throw ValidationError(where + ": 'meta' of document '" + doc.id + "' must be an object");
      }
      for (const auto& [k, v] : row["meta"].items()) {
        if (!v.is_string()) {
          throw ValidationError(where + ": meta value '" + k + "' of document '" + doc.id +
                                "' must be a string");
        }
        doc.meta[k] = v.get<std::string>();
      }
    }
    auto [it, inserted] = seen.emplace(doc.id, lineno);
    if (!inserted) {
      throw ValidationError(origin + ": duplicate document id '" + doc.id + "' on lines " +
                            std::to_string(it->second) + " and " + std::to_string(lineno));
    }
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::vector<Document> load_corpus(const std::string& path) {
  return parse_corpus(read_file(path), path);
}

std::string corpus_to_jsonl(const std::vector<Document>& corpus) {
  std::string out;
  for (const Document& doc : corpus) {
    ordered_json row;
    row["id"] = doc.id;
    row["text"] = doc.text;
    if (!doc.meta.empty()) {
      ordered_json meta;
      for (const auto& [k, v] : doc.meta) {
        meta[k] = v;
      }
      row["meta"] = meta;
    }
    out += row.dump();
    out += '\n';
  }
  return out;
}

void save_corpus(const std::vector<Document>& corpus, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  out << corpus_to_jsonl(corpus);
  if (!out) {
    throw IoError("short write: " + path);
  }
}

}  // namespace dicho
