// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#include "dicho/pipeline.hpp"

#include <atomic>
#include <cctype>
#include <exception>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>

#include "dicho/tokenizer.hpp"
#include "json.hpp"

namespace dicho {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  out << content;
  if (!out) {
    throw IoError("short write: " + path);
  }
}

ordered_json labels_to_json(const LabelVector& row, const Taxonomy& taxonomy) {
  ordered_json labels;
  for (std::size_t k = 0; k < taxonomy.K(); ++k) {
    const auto& cell = row[k];
    if (cell.has_value()) {
      labels[taxonomy.label(k).name] = *cell;
    } else {
      labels[taxonomy.label(k).name] = nullptr;
    }
  }
  return labels;
}

LabelVector labels_from_json(const json& labels, const Taxonomy& taxonomy,
                             const std::string& where) {
  if (!labels.is_object()) {
    throw ValidationError(where + ": 'labels' must be an object");
  }
  LabelVector row(taxonomy.K());
  for (std::size_t k = 0; k < taxonomy.K(); ++k) {
    const std::string& name = taxonomy.label(k).name;
    auto it = labels.find(name);
    if (it == labels.end()) {
      throw ValidationError(where + ": label '" + name + "' missing");
    }
    if (it->is_null()) {
      continue;
    }
    if (!it->is_boolean()) {
      throw ValidationError(where + ": label '" + name + "' must be boolean or null");
    }
    row.set(k, it->get<bool>());
  }
  return row;
}

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) {
    return "";
  }
  std::size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"') {
        if (i + 1 < line.size() && line[i + 1] == '"') {
          cur += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  fields.push_back(cur);
  return fields;
}

}  // namespace

QueryPlan plan_queries(const std::vector<Document>& corpus, const Taxonomy& taxonomy,
                       Strategy strategy, LayoutCase layout, QueryOrder ordering, int n_runs,
                       const PromptTexts& texts) {
  if (n_runs < 1) {
    throw ValidationError("plan_queries: n_runs must be >= 1");
  }
  QueryPlan plan;
  plan.strategy = strategy;
  plan.layout = layout;
  plan.ordering = ordering;
  plan.n_runs = n_runs;
  std::vector<Prompt> per_run =
      (strategy == Strategy::dichotomic)
          ? build_dichotomic_plan(corpus, taxonomy, layout, ordering, texts.dichotomic_instruction)
          : build_json_plan(corpus, taxonomy, texts.json_template);
  plan.entries.reserve(per_run.size() * static_cast<std::size_t>(n_runs));
  for (int run = 1; run <= n_runs; ++run) {
    for (const Prompt& p : per_run) {
      plan.entries.push_back(PlanEntry{p.doc_id, p.target_label, run, p});
    }
  }
  return plan;
}

std::string plan_hash(const QueryPlan& plan) {
  std::string feed;
  for (const PlanEntry& e : plan.entries) {
    feed += e.doc_id;
    feed += '\x1f';
    feed += e.target;
    feed += '\x1f';
    feed += std::to_string(e.run_id);
    feed += '\x1f';
    feed += sha256_hex(e.prompt.rendered);
    feed += '\n';
  }
  return sha256_hex(feed);
}

AnnotateResult annotate(const QueryPlan& plan, const Backend& backend, const Taxonomy& taxonomy,
                        const AnswerLexicon& lexicon, const AnnotateOptions& opts) {
  lexicon.validate();
  const std::size_t n = plan.entries.size();
  const std::size_t json_budget =
      opts.json_max_tokens > 0 ? opts.json_max_tokens : 2 * json_decode_estimate(taxonomy) + 32;

  std::vector<std::string> raw(n);
  std::vector<std::exception_ptr> errors(n);
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= n) {
        return;
      }
      const PlanEntry& e = plan.entries[i];
      const std::size_t budget =
          (e.prompt.strategy == Strategy::dichotomic) ? opts.dicho_max_tokens : json_budget;
      try {
        raw[i] = backend.complete(e.prompt, budget, e.run_id);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  const std::size_t n_workers = std::max<std::size_t>(1, std::min(opts.max_in_flight, n));
  if (n_workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t w = 0; w < n_workers; ++w) {
      pool.emplace_back(worker);
    }
    for (std::thread& t : pool) {
      t.join();
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (errors[i]) {
      std::rethrow_exception(errors[i]);
    }
  }

  AnnotateResult result;
  result.runs.resize(static_cast<std::size_t>(plan.n_runs));
  for (int r = 0; r < plan.n_runs; ++r) {
    result.runs[static_cast<std::size_t>(r)].run_id = r + 1;
  }
  result.completions.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const PlanEntry& e = plan.entries[i];
    result.completions.push_back(
        CompletionRecord{sha256_hex(e.prompt.rendered), e.run_id, raw[i]});
    AnnotationRun& run = result.runs.at(static_cast<std::size_t>(e.run_id - 1));
    auto [row_it, created] = run.rows.try_emplace(e.doc_id, LabelVector(taxonomy.K()));
    (void)created;
    LabelVector& row = row_it->second;
    if (e.prompt.strategy == Strategy::dichotomic) {
      const auto k = taxonomy.index_of(e.target);
      if (!k.has_value()) {
        throw ContractViolation("annotate: plan entry targets unknown label '" + e.target + "'");
      }
      const auto verdict = try_parse_dichotomic_answer(raw[i], lexicon);
      if (verdict.has_value()) {
        row.set(*k, *verdict);
      } else {
        ++result.failures.unparseable_answers;
        result.failure_records.push_back(FailureRecord{
            e.doc_id, e.target, e.run_id, "UnparseableAnswer", raw[i].substr(0, 120)});
      }
    } else {
      JsonAnswer ans = parse_json_answer_detail(raw[i], taxonomy);
      result.failures.json_extra_keys += ans.extra_keys;
      if (ans.labels.has_value()) {
        row = *ans.labels;
      } else {
        const char* cls = "JsonSyntaxError";
        switch (ans.failure) {
          case JsonFailure::syntax:
            ++result.failures.json_syntax;
            cls = "JsonSyntaxError";
            break;
          case JsonFailure::missing_label:
            ++result.failures.json_missing_label;
            cls = "MissingLabelError";
            break;
          case JsonFailure::wrong_type:
            ++result.failures.json_wrong_type;
            cls = "TypeError";
            break;
          case JsonFailure::none:
            break;
        }
        result.failure_records.push_back(
            FailureRecord{e.doc_id, e.target, e.run_id, cls, ans.detail.substr(0, 200)});
      }
    }
  }
  return result;
}

ConsensusLabels aggregate_majority(const std::vector<AnnotationRun>& runs, TiePolicy tie_policy) {
  if (runs.empty()) {
    throw ValidationError("aggregate_majority: no runs");
  }
  const auto& first_rows = runs.front().rows;
  std::size_t k_size = first_rows.empty() ? 0 : first_rows.begin()->second.size();
  for (const AnnotationRun& run : runs) {
    if (run.rows.size() != first_rows.size()) {
      throw ValidationError("aggregate_majority: runs cover different document sets");
    }
    for (const auto& [id, row] : run.rows) {
      if (first_rows.find(id) == first_rows.end()) {
        throw ValidationError("aggregate_majority: document '" + id + "' missing from run 1");
      }
      if (row.size() != k_size) {
        throw ValidationError("aggregate_majority: label vector size mismatch for '" + id + "'");
      }
    }
  }

  ConsensusLabels consensus;
  consensus.n_runs = static_cast<int>(runs.size());
  for (const auto& [id, unused] : first_rows) {
    (void)unused;
    LabelVector cells(k_size);
    std::vector<int> margin(k_size, 0);
    for (std::size_t k = 0; k < k_size; ++k) {
      int yes = 0;
      int no = 0;
      for (const AnnotationRun& run : runs) {
        const auto& cell = run.rows.at(id)[k];
        if (!cell.has_value()) {
          continue;
        }
        (*cell ? yes : no) += 1;
      }
      if (yes == 0 && no == 0) {
        continue;  // abstain
      }
      if (yes > no) {
        cells.set(k, true);
        margin[k] = yes;
      } else if (no > yes) {
        cells.set(k, false);
        margin[k] = no;
      } else if (tie_policy == TiePolicy::false_on_tie) {
        cells.set(k, false);
        margin[k] = no;
      }
      // abstain_on_tie leaves the cell unset with margin 0.
    }
    consensus.rows.emplace(id, std::move(cells));
    consensus.vote_margin.emplace(id, std::move(margin));
  }
  return consensus;
}

std::string dataset_to_jsonl(const ConsensusLabels& consensus, const std::vector<Document>& corpus,
                             const Taxonomy& taxonomy) {
  std::set<std::string> corpus_ids;
  std::string out;
  for (const Document& doc : corpus) {
    corpus_ids.insert(doc.id);
    auto it = consensus.rows.find(doc.id);
    if (it == consensus.rows.end()) {
      throw ValidationError("export_dataset: no consensus row for document '" + doc.id + "'");
    }
    ordered_json row;
    row["id"] = doc.id;
    row["text"] = doc.text;
    row["labels"] = labels_to_json(it->second, taxonomy);
    out += row.dump();
    out += '\n';
  }
  for (const auto& [id, unused] : consensus.rows) {
    (void)unused;
    if (corpus_ids.find(id) == corpus_ids.end()) {
      throw ValidationError("export_dataset: consensus row '" + id + "' not in corpus");
    }
  }
  return out;
}

void export_dataset(const ConsensusLabels& consensus, const std::vector<Document>& corpus,
                    const Taxonomy& taxonomy, const std::string& path) {
  write_file(path, dataset_to_jsonl(consensus, corpus, taxonomy));
}

Dataset parse_dataset(const std::string& jsonl_text, const Taxonomy& taxonomy,
                      const std::string& origin) {
  Dataset ds;
  std::istringstream in(jsonl_text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    const std::string where = origin + ":" + std::to_string(lineno);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed JSON line: " + e.what());
    }
    if (!row.is_object() || !row.contains("id") || !row["id"].is_string() ||
        !row.contains("text") || !row["text"].is_string() || !row.contains("labels")) {
      throw ValidationError(where + ": dataset row needs id, text, labels");
    }
    Document doc;
    doc.id = row["id"].get<std::string>();
    doc.text = row["text"].get<std::string>();
    if (ds.rows.count(doc.id) != 0) {
      throw ValidationError(where + ": duplicate dataset id '" + doc.id + "'");
    }
    ds.rows.emplace(doc.id, labels_from_json(row["labels"], taxonomy, where));
    ds.docs.push_back(std::move(doc));
  }
  return ds;
}

Dataset load_dataset(const std::string& path, const Taxonomy& taxonomy) {
  return parse_dataset(read_file(path), taxonomy, path);
}

std::vector<Correction> parse_corrections_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  std::vector<Correction> out;
  bool saw_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (trim(line).empty()) {
      continue;
    }
    const std::string where = origin + ":" + std::to_string(lineno);
    std::vector<std::string> fields = split_csv_line(line);
    if (!saw_header) {
      if (fields.size() < 4 || trim(fields[0]) != "id" || trim(fields[1]) != "label" ||
          trim(fields[2]) != "value" || trim(fields[3]) != "annotator") {
        throw ValidationError(where + ": corrections header must be id,label,value,annotator");
      }
      saw_header = true;
      continue;
    }
    if (fields.size() != 4) {
      throw ValidationError(where + ": expected 4 fields, got " + std::to_string(fields.size()));
    }
    Correction c;
    c.id = trim(fields[0]);
    c.label = trim(fields[1]);
    std::string v = trim(fields[2]);
    for (auto& ch : v) {
      ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
    }
    if (v == "true" || v == "1") {
      c.value = true;
    } else if (v == "false" || v == "0") {
      c.value = false;
    } else {
      throw ValidationError(where + ": value must be true/false/1/0, got '" + fields[2] + "'");
    }
    c.annotator = trim(fields[3]);
    if (c.id.empty() || c.label.empty()) {
      throw ValidationError(where + ": id and label must be non-empty");
    }
    out.push_back(std::move(c));
  }
  if (!saw_header) {
    throw ValidationError(origin + ": corrections file has no header row");
  }
  return out;
}

std::vector<Correction> load_corrections_csv(const std::string& path) {
  return parse_corrections_csv(read_file(path), path);
}

ConsensusLabels apply_corrections(ConsensusLabels base, const std::vector<Correction>& corrections,
                                  const Taxonomy& taxonomy) {
  std::vector<std::string> offenders;
  for (const Correction& c : corrections) {
    if (base.rows.find(c.id) == base.rows.end()) {
      offenders.push_back("unknown id '" + c.id + "'");
    } else if (!taxonomy.index_of(c.label).has_value()) {
      offenders.push_back("unknown label '" + c.label + "' (id '" + c.id + "')");
    }
  }
  if (!offenders.empty()) {
    std::string msg = "corrections reference unknown cells: ";
    for (std::size_t i = 0; i < offenders.size(); ++i) {
      if (i > 0) {
        msg += "; ";
      }
      msg += offenders[i];
    }
    throw ValidationError(msg);
  }
  for (const Correction& c : corrections) {
    const std::size_t k = *taxonomy.index_of(c.label);
    LabelVector& row = base.rows.at(c.id);
    row.set(k, c.value);
    auto [it, created] = base.corrected.try_emplace(c.id, std::vector<bool>(taxonomy.K(), false));
    (void)created;
    it->second[k] = true;
  }
  return base;
}

void save_runs_jsonl(const std::vector<AnnotationRun>& runs, const Taxonomy& taxonomy,
                     const std::string& path) {
  std::string out;
  for (const AnnotationRun& run : runs) {
    for (const auto& [id, row] : run.rows) {
      ordered_json j;
      j["run"] = run.run_id;
      j["id"] = id;
      j["labels"] = labels_to_json(row, taxonomy);
      out += j.dump();
      out += '\n';
    }
  }
  write_file(path, out);
}

std::vector<AnnotationRun> load_runs_jsonl(const std::string& path, const Taxonomy& taxonomy) {
  const std::string text = read_file(path);
  std::map<int, AnnotationRun> by_run;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (trim(line).empty()) {
      continue;
    }
    const std::string where = path + ":" + std::to_string(lineno);
    json row;
    try {
      row = json::parse(line);
    } catch (const json::parse_error& e) {
      throw ValidationError(where + ": malformed JSON line: " + e.what());
    }
    if (!row.contains("run") || !row["run"].is_number_integer() || !row.contains("id") ||
        !row["id"].is_string() || !row.contains("labels")) {
      throw ValidationError(where + ": runs row needs run, id, labels");
    }
    const int run_id = row["run"].get<int>();
    AnnotationRun& run = by_run[run_id];
    run.run_id = run_id;
    const std::string id = row["id"].get<std::string>();
    if (!run.rows.emplace(id, labels_from_json(row["labels"], taxonomy, where)).second) {
      throw ValidationError(where + ": duplicate (run, id) pair: run " + std::to_string(run_id) +
                            ", id '" + id + "'");
    }
  }
  std::vector<AnnotationRun> runs;
  runs.reserve(by_run.size());
  for (auto& [run_id, run] : by_run) {
    (void)run_id;
    runs.push_back(std::move(run));
  }
  return runs;
}

void write_completions_jsonl(const std::vector<CompletionRecord>& completions,
                             const std::string& path) {
  std::string out;
  for (const CompletionRecord& c : completions) {
    ordered_json row;
    row["prompt_sha256"] = c.prompt_sha256;
    row["run"] = c.run;
    row["completion"] = c.completion;
    out += row.dump();
    out += '\n';
  }
  write_file(path, out);
}

void write_failures_jsonl(const std::vector<FailureRecord>& records, const std::string& path) {
  std::string out;
  for (const FailureRecord& r : records) {
    ordered_json row;
    row["doc_id"] = r.doc_id;
    row["target"] = r.target;
    row["run"] = r.run;
    row["error_class"] = r.error_class;
    row["detail"] = r.detail;
    out += row.dump();
    out += '\n';
  }
  write_file(path, out);
}

}  // namespace dicho
