// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "dicho/cache.hpp"
#include "dicho/domain.hpp"
#include "dicho/prompt.hpp"

namespace dicho {

struct CostParams {
  double alpha = 1.0;  // per uncached prefill token
  double beta = 8.0;   // per decoded token
  double gamma = 0.0;  // per-request overhead
};

struct CostBreakdown {
  std::size_t prefill_uncached_tokens = 0;
  std::size_t prefill_cached_tokens = 0;
  std::size_t decode_tokens = 0;
  double est_time = 0.0;
};

enum class QueryOrder { doc_grouped, label_grouped, interleaved };

struct PromptTexts {
  std::string dichotomic_instruction;
  std::string json_template;

  PromptTexts();
};

struct WorkloadReport {
  Strategy strategy = Strategy::dichotomic;
  LayoutCase layout = LayoutCase::case3;
  std::size_t text_len = 0;  // 0 when the corpus has mixed natural lengths
  std::size_t batch_size = 1;
  std::optional<std::size_t> capacity_blocks;
  std::vector<CostBreakdown> requests;
  CostBreakdown totals;
  CacheStats cache;
  std::uint64_t json_parse_failures = 0;
  std::vector<double> wall_ms;  // live mode only, one entry per request

  double hit_rate() const;
};

CostBreakdown estimate_request(const Prompt& prompt, std::size_t cache_hit_tokens,
                               std::size_t decode_tokens, const CostParams& params);

// Decode budget for the json strategy: token count of a rendered completion
// object over the whole taxonomy.
std::size_t json_decode_estimate(const Taxonomy& taxonomy);

std::vector<Prompt> build_dichotomic_plan(const std::vector<Document>& corpus,
                                          const Taxonomy& taxonomy, LayoutCase layout,
                                          QueryOrder order, const std::string& instruction);

std::vector<Prompt> build_json_plan(const std::vector<Document>& corpus, const Taxonomy& taxonomy,
                                    const std::string& json_template);

// Splits the corpus into consecutive batches of batch_size documents; inside
// a batch, queries run label-major over the batch documents. Models batched
// serving where a document's K queries are separated by the other batch
// members' work.
std::vector<Prompt> build_batched_dichotomic_plan(const std::vector<Document>& corpus,
                                                  const Taxonomy& taxonomy, LayoutCase layout,
                                                  std::size_t batch_size,
                                                  const std::string& instruction);

// Replays prompts in order through a fresh cache (lookup then insert per
// prompt), pricing each request with the cost model. Dichotomic prompts
// decode one token; json prompts decode json_decode_tokens.
WorkloadReport run_prompt_sequence(const std::vector<Prompt>& prompts, const CacheConfig& cache_cfg,
                                   const CostParams& params, std::size_t json_decode_tokens,
                                   PrefixCache* cache_out = nullptr);

WorkloadReport simulate_workload(const std::vector<Document>& corpus, const Taxonomy& taxonomy,
                                 Strategy strategy, LayoutCase layout, const CacheConfig& cache_cfg,
                                 const CostParams& params, QueryOrder order,
                                 const PromptTexts& texts = PromptTexts());

struct ComparisonRow {
  std::size_t text_len = 0;
  std::size_t batch = 1;
  std::optional<std::size_t> capacity_blocks;
  double dichotomic_est_time = 0.0;
  double json_est_time = 0.0;
  double dichotomic_hit_rate = 0.0;
  double json_hit_rate = 0.0;
  double time_ratio = 0.0;  // dichotomic / json
};

using ComparisonTable = std::vector<ComparisonRow>;

// Synthesizes n_docs documents per text length and runs both strategies for
// every (text_len, batch_size) cell. Dichotomic uses Case 3.
ComparisonTable compare_strategies(const std::vector<std::size_t>& text_lens, std::size_t n_docs,
                                   const Taxonomy& taxonomy, const CacheConfig& cache_cfg,
                                   const CostParams& params,
                                   const std::vector<std::size_t>& batch_sizes,
                                   std::uint64_t seed = 1,
                                   const PromptTexts& texts = PromptTexts());

std::string workload_csv_header(bool include_wall = false);
std::string workload_csv_row(const WorkloadReport& r, bool include_wall = false);
void write_workload_csv(const std::vector<WorkloadReport>& reports, const std::string& path,
                        bool include_wall = false);

std::string comparison_csv_header();
std::string comparison_csv_row(const ComparisonRow& row);
void write_comparison_csv(const ComparisonTable& table, const std::string& path);

}  // namespace dicho
