// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#include "dicho/cost.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include "dicho/tokenizer.hpp"

namespace dicho {

namespace {

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

std::string capacity_field(const std::optional<std::size_t>& cap) {
  return cap.has_value() ? std::to_string(*cap) : std::string("inf");
}

}  // namespace

PromptTexts::PromptTexts()
    : dichotomic_instruction(default_dichotomic_instruction()),
      json_template(default_json_instruction_template()) {}

double WorkloadReport::hit_rate() const {
  const std::uint64_t total = cache.hit_tokens + cache.miss_tokens;
  return total == 0 ? 0.0 : static_cast<double>(cache.hit_tokens) / static_cast<double>(total);
}

CostBreakdown estimate_request(const Prompt& prompt, std::size_t cache_hit_tokens,
                               std::size_t decode_tokens, const CostParams& params) {
  const std::size_t total = count_tokens(prompt.rendered);
  if (cache_hit_tokens > total) {
    throw ContractViolation("estimate_request: hit tokens exceed prompt tokens");
  }
  CostBreakdown b;
  b.prefill_uncached_tokens = total - cache_hit_tokens;
  b.prefill_cached_tokens = cache_hit_tokens;
  b.decode_tokens = decode_tokens;
  b.est_time = params.alpha * static_cast<double>(b.prefill_uncached_tokens) +
               params.beta * static_cast<double>(decode_tokens) + params.gamma;
  return b;
}

std::size_t json_decode_estimate(const Taxonomy& taxonomy) {
  LabelVector all_false(taxonomy.K());
  for (std::size_t i = 0; i < taxonomy.K(); ++i) {
    all_false.set(i, false);
  }
  return count_tokens(render_json_object(taxonomy, all_false));
}

std::vector<Prompt> build_dichotomic_plan(const std::vector<Document>& corpus,
                                          const Taxonomy& taxonomy, LayoutCase layout,
                                          QueryOrder order, const std::string& instruction) {
  const std::size_t K = taxonomy.K();
  std::vector<Prompt> plan;
  plan.reserve(corpus.size() * K);
  switch (order) {
    case QueryOrder::doc_grouped:
      for (const Document& doc : corpus) {
        for (std::size_t k = 0; k < K; ++k) {
          plan.push_back(build_dichotomic_prompt(doc, taxonomy.label(k), layout, instruction));
        }
      }
      break;
    case QueryOrder::label_grouped:
      for (std::size_t k = 0; k < K; ++k) {
        for (const Document& doc : corpus) {
          plan.push_back(build_dichotomic_prompt(doc, taxonomy.label(k), layout, instruction));
        }
      }
      break;
    case QueryOrder::interleaved:
      for (std::size_t r = 0; r < K; ++r) {
        for (std::size_t d = 0; d < corpus.size(); ++d) {
          const std::size_t k = (d + r) % K;
          plan.push_back(
              build_dichotomic_prompt(corpus[d], taxonomy.label(k), layout, instruction));
        }
      }
      break;
  }
  return plan;
}

std::vector<Prompt> build_json_plan(const std::vector<Document>& corpus, const Taxonomy& taxonomy,
                                    const std::string& json_template) {
  std::vector<Prompt> plan;
  plan.reserve(corpus.size());
  for (const Document& doc : corpus) {
    plan.push_back(build_json_prompt(doc, taxonomy, json_template));
  }
  return plan;
}

std::vector<Prompt> build_batched_dichotomic_plan(const std::vector<Document>& corpus,
                                                  const Taxonomy& taxonomy, LayoutCase layout,
                                                  std::size_t batch_size,
                                                  const std::string& instruction) {
  if (batch_size < 1) {
    throw ValidationError("batch_size must be >= 1");
  }
  const std::size_t K = taxonomy.K();
  std::vector<Prompt> plan;
  plan.reserve(corpus.size() * K);
  for (std::size_t start = 0; start < corpus.size(); start += batch_size) {
    const std::size_t end = std::min(start + batch_size, corpus.size());
    for (std::size_t k = 0; k < K; ++k) {
      for (std::size_t d = start; d < end; ++d) {
        plan.push_back(build_dichotomic_prompt(corpus[d], taxonomy.label(k), layout, instruction));
      }
    }
  }
  return plan;
}

WorkloadReport run_prompt_sequence(const std::vector<Prompt>& prompts, const CacheConfig& cache_cfg,
                                   const CostParams& params, std::size_t json_decode_tokens,
                                   PrefixCache* cache_out) {
  WorkloadReport report;
  report.capacity_blocks = cache_cfg.capacity_blocks;
  PrefixCache local(cache_cfg);
  PrefixCache& cache = cache_out ? *cache_out : local;
  report.requests.reserve(prompts.size());
  for (const Prompt& p : prompts) {
    const TokenSeq seq = tokenize(p.rendered);
    const std::string tag = p.doc_id + (p.target_label.empty() ? "" : ":" + p.target_label);
    const std::size_t hit = cache.lookup(seq, tag);
    cache.insert(seq, tag);
    const std::size_t decode = (p.strategy == Strategy::dichotomic) ? 1 : json_decode_tokens;
    CostBreakdown b = estimate_request(p, hit, decode, params);
    report.totals.prefill_uncached_tokens += b.prefill_uncached_tokens;
    report.totals.prefill_cached_tokens += b.prefill_cached_tokens;
    report.totals.decode_tokens += b.decode_tokens;
    report.totals.est_time += b.est_time;
    report.requests.push_back(b);
  }
  report.cache = cache.stats();
  if (!prompts.empty()) {
    report.strategy = prompts.front().strategy;
  }
  return report;
}

WorkloadReport simulate_workload(const std::vector<Document>& corpus, const Taxonomy& taxonomy,
                                 Strategy strategy, LayoutCase layout, const CacheConfig& cache_cfg,
                                 const CostParams& params, QueryOrder order,
                                 const PromptTexts& texts) {
  if (corpus.empty()) {
    throw ValidationError("simulate_workload: corpus is empty");
  }
  std::vector<Prompt> plan =
      (strategy == Strategy::dichotomic)
          ? build_dichotomic_plan(corpus, taxonomy, layout, order, texts.dichotomic_instruction)
          : build_json_plan(corpus, taxonomy, texts.json_template);
  WorkloadReport report =
      run_prompt_sequence(plan, cache_cfg, params, json_decode_estimate(taxonomy));
  report.strategy = strategy;
  report.layout = layout;
  report.capacity_blocks = cache_cfg.capacity_blocks;
  return report;
}

ComparisonTable compare_strategies(const std::vector<std::size_t>& text_lens, std::size_t n_docs,
                                   const Taxonomy& taxonomy, const CacheConfig& cache_cfg,
                                   const CostParams& params,
                                   const std::vector<std::size_t>& batch_sizes,
                                   std::uint64_t seed, const PromptTexts& texts) {
  if (text_lens.empty()) {
    throw ValidationError("compare_strategies: text_lens is empty");
  }
  if (n_docs < 1) {
    throw ValidationError("compare_strategies: n_docs must be >= 1");
  }
  const std::size_t json_decode = json_decode_estimate(taxonomy);
  ComparisonTable table;
  for (std::size_t batch : batch_sizes) {
    for (std::size_t len : text_lens) {
      std::vector<Document> corpus;
      corpus.reserve(n_docs);
      for (std::size_t d = 0; d < n_docs; ++d) {
        Document doc;
        doc.id = "syn" + std::to_string(len) + "_" + std::to_string(d);
        doc.text = synth_text(len, seed + 7919 * len + d);
        corpus.push_back(std::move(doc));
      }
      std::vector<Prompt> dicho_plan = build_batched_dichotomic_plan(
          corpus, taxonomy, LayoutCase::case3, batch, texts.dichotomic_instruction);
      WorkloadReport dicho = run_prompt_sequence(dicho_plan, cache_cfg, params, json_decode);
      std::vector<Prompt> json_plan = build_json_plan(corpus, taxonomy, texts.json_template);
      WorkloadReport json = run_prompt_sequence(json_plan, cache_cfg, params, json_decode);

      ComparisonRow row;
      row.text_len = len;
      row.batch = batch;
      row.capacity_blocks = cache_cfg.capacity_blocks;
      row.dichotomic_est_time = dicho.totals.est_time;
      row.json_est_time = json.totals.est_time;
      row.dichotomic_hit_rate = dicho.hit_rate();
      row.json_hit_rate = json.hit_rate();
      row.time_ratio = json.totals.est_time == 0.0
                           ? 0.0
                           : dicho.totals.est_time / json.totals.est_time;
      table.push_back(row);
    }
  }
  return table;
}

std::string workload_csv_header(bool include_wall) {
  std::string h =
      "strategy,layout,text_len,batch,capacity,prefill_uncached,prefill_cached,decode,"
      "est_time,hit_rate,json_failures";
  if (include_wall) {
    h += ",wall_ms_total";
  }
  return h;
}

std::string workload_csv_row(const WorkloadReport& r, bool include_wall) {
  std::string row;
  row += (r.strategy == Strategy::dichotomic) ? "dichotomic" : "json";
  row += ',';
  row += (r.strategy == Strategy::dichotomic) ? std::to_string(static_cast<int>(r.layout))
                                              : std::string("-");
  row += ',' + std::to_string(r.text_len);
  row += ',' + std::to_string(r.batch_size);
  row += ',' + capacity_field(r.capacity_blocks);
  row += ',' + std::to_string(r.totals.prefill_uncached_tokens);
  row += ',' + std::to_string(r.totals.prefill_cached_tokens);
  row += ',' + std::to_string(r.totals.decode_tokens);
  row += ',' + format_double(r.totals.est_time);
  row += ',' + format_double(r.hit_rate());
  row += ',' + std::to_string(r.json_parse_failures);
  if (include_wall) {
    double total = 0.0;
    for (double w : r.wall_ms) {
      total += w;
    }
    row += ',' + format_double(total);
  }
  return row;
}

void write_workload_csv(const std::vector<WorkloadReport>& reports, const std::string& path,
                        bool include_wall) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  out << workload_csv_header(include_wall) << '\n';
  for (const WorkloadReport& r : reports) {
    out << workload_csv_row(r, include_wall) << '\n';
  }
  if (!out) {
    throw IoError("short write: " + path);
  }
}

std::string comparison_csv_header() {
  return "text_len,batch,capacity_blocks,dichotomic_est_time,json_est_time,"
         "dichotomic_hit_rate,json_hit_rate,time_ratio";
}

std::string comparison_csv_row(const ComparisonRow& row) {
  std::string s;
  s += std::to_string(row.text_len);
  s += ',' + std::to_string(row.batch);
  s += ',' + capacity_field(row.capacity_blocks);
  s += ',' + format_double(row.dichotomic_est_time);
  s += ',' + format_double(row.json_est_time);
  s += ',' + format_double(row.dichotomic_hit_rate);
  s += ',' + format_double(row.json_hit_rate);
  s += ',' + format_double(row.time_ratio);
  return s;
}

void write_comparison_csv(const ComparisonTable& table, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  out << comparison_csv_header() << '\n';
  for (const ComparisonRow& row : table) {
    out << comparison_csv_row(row) << '\n';
  }
  if (!out) {
    throw IoError("short write: " + path);
  }
}

}  // namespace dicho
