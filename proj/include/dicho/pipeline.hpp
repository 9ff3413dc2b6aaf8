// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "dicho/backend.hpp"
#include "dicho/cost.hpp"
#include "dicho/domain.hpp"
#include "dicho/prompt.hpp"

namespace dicho {

struct PlanEntry {
  std::string doc_id;
  std::string target;  // label name for dichotomic entries, empty for json
  int run_id = 1;
  Prompt prompt;
};

struct QueryPlan {
  Strategy strategy = Strategy::dichotomic;
  LayoutCase layout = LayoutCase::case3;
  QueryOrder ordering = QueryOrder::doc_grouped;
  int n_runs = 1;
  std::vector<PlanEntry> entries;
};

// Runs are outermost: the full per-run plan for run 1 precedes run 2, and so
// on. Entry count is n_runs * |corpus| * (K for dichotomic, 1 for json).
QueryPlan plan_queries(const std::vector<Document>& corpus, const Taxonomy& taxonomy,
                       Strategy strategy, LayoutCase layout, QueryOrder ordering, int n_runs,
                       const PromptTexts& texts = PromptTexts());

// Content hash over (doc_id, target, run, prompt sha) of every entry in order.
std::string plan_hash(const QueryPlan& plan);

struct FailureCounters {
  std::uint64_t unparseable_answers = 0;
  std::uint64_t json_syntax = 0;
  std::uint64_t json_missing_label = 0;
  std::uint64_t json_wrong_type = 0;
  std::uint64_t json_extra_keys = 0;  // warning counter, not a failed entry

  std::uint64_t failed_entries() const {
    return unparseable_answers + json_syntax + json_missing_label + json_wrong_type;
  }
  std::uint64_t json_failures() const { return json_syntax + json_missing_label + json_wrong_type; }
};

struct FailureRecord {
  std::string doc_id;
  std::string target;
  int run = 0;
  std::string error_class;
  std::string detail;
};

struct CompletionRecord {
  std::string prompt_sha256;
  int run = 0;
  std::string completion;
};

struct AnnotateOptions {
  std::size_t max_in_flight = 8;
  std::size_t dicho_max_tokens = 16;
  std::size_t json_max_tokens = 0;  // 0 derives a budget from the taxonomy
};

struct AnnotateResult {
  std::vector<AnnotationRun> runs;
  FailureCounters failures;
  std::vector<FailureRecord> failure_records;
  // One record per plan entry, in plan order; dumping these to a fixture
  // makes the whole annotation replayable byte for byte.
  std::vector<CompletionRecord> completions;
};

// Dispatches backend calls with at most max_in_flight concurrent requests,
// then parses in plan order. Parse failures become missing cells and
// counters; backend errors abort.
AnnotateResult annotate(const QueryPlan& plan, const Backend& backend, const Taxonomy& taxonomy,
                        const AnswerLexicon& lexicon, const AnnotateOptions& opts = {});

enum class TiePolicy { false_on_tie, abstain_on_tie };

struct ConsensusLabels {
  std::map<std::string, LabelVector> rows;
  // Votes agreeing with the consensus value per cell; 0 for abstained cells.
  std::map<std::string, std::vector<int>> vote_margin;
  // Cells overwritten by human corrections.
  std::map<std::string, std::vector<bool>> corrected;
  int n_runs = 0;
};

// Per-cell majority over present votes. Missing votes are excluded; a cell
// with zero valid votes abstains (null) regardless of tie_policy.
ConsensusLabels aggregate_majority(const std::vector<AnnotationRun>& runs, TiePolicy tie_policy);

struct Dataset {
  std::vector<Document> docs;
  LabelRows rows;
};

std::string dataset_to_jsonl(const ConsensusLabels& consensus, const std::vector<Document>& corpus,
                             const Taxonomy& taxonomy);
void export_dataset(const ConsensusLabels& consensus, const std::vector<Document>& corpus,
                    const Taxonomy& taxonomy, const std::string& path);
Dataset parse_dataset(const std::string& jsonl_text, const Taxonomy& taxonomy,
                      const std::string& origin = "<string>");
Dataset load_dataset(const std::string& path, const Taxonomy& taxonomy);

struct Correction {
  std::string id;
  std::string label;
  bool value = false;
  std::string annotator;
};

// CSV with header id,label,value,annotator; value is true/false/1/0.
std::vector<Correction> parse_corrections_csv(const std::string& text,
                                              const std::string& origin = "<string>");
std::vector<Correction> load_corrections_csv(const std::string& path);

// Overwrites corrected cells and flags them. Unknown ids or labels raise one
// ValidationError listing every offender.
ConsensusLabels apply_corrections(ConsensusLabels base, const std::vector<Correction>& corrections,
                                  const Taxonomy& taxonomy);

void save_runs_jsonl(const std::vector<AnnotationRun>& runs, const Taxonomy& taxonomy,
                     const std::string& path);
std::vector<AnnotationRun> load_runs_jsonl(const std::string& path, const Taxonomy& taxonomy);

void write_completions_jsonl(const std::vector<CompletionRecord>& completions,
                             const std::string& path);
void write_failures_jsonl(const std::vector<FailureRecord>& records, const std::string& path);

}  // namespace dicho
