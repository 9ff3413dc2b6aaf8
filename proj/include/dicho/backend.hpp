// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "dicho/domain.hpp"
#include "dicho/prompt.hpp"

namespace dicho {

// Answer provider contract. Implementations must tolerate concurrent
// complete() calls; the runner bounds the number in flight.
class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string complete(const Prompt& prompt, std::size_t max_decode_tokens,
                               int run) const = 0;
  virtual std::string name() const = 0;
};

// label name -> keyword list; a label is judged true for a document when any
// keyword occurs in the text (ASCII case-insensitive substring).
using RuleTable = std::map<std::string, std::vector<std::string>>;

RuleTable parse_oracle_rules(const std::string& json_text, const std::string& origin);
RuleTable load_oracle_rules(const std::string& path);

struct FaultConfig {
  double p_truncate = 0.0;  // probability of truncating a json completion
  std::uint64_t seed = 0;
};

// Deterministic rule-table provider. Its judgments double as gold labels in
// tests, and its dichotomic and json answers always agree for a given
// (document, label) pair.
class OracleBackend : public Backend {
 public:
  OracleBackend(Taxonomy taxonomy, RuleTable rules, AnswerLexicon lexicon,
                FaultConfig fault = {});

  std::string complete(const Prompt& prompt, std::size_t max_decode_tokens,
                       int run) const override;
  std::string name() const override { return "oracle"; }

  bool judge(const std::string& text, const std::string& label) const;
  LabelVector judge_all(const std::string& text) const;

 private:
  Taxonomy taxonomy_;
  RuleTable rules_;
  AnswerLexicon lexicon_;
  FaultConfig fault_;
};

// Serves completions recorded in a JSONL fixture of
// {prompt_sha256, run, completion} rows. Missing keys raise ReplayMiss.
class ReplayBackend : public Backend {
 public:
  explicit ReplayBackend(const std::string& fixture_path);

  std::string complete(const Prompt& prompt, std::size_t max_decode_tokens,
                       int run) const override;
  std::string name() const override { return "replay"; }

  std::size_t size() const { return completions_.size(); }

 private:
  std::map<std::pair<std::string, int>, std::string> completions_;
  std::string origin_;
};

struct HttpConfig {
  std::string base_url;
  std::string model;
  std::string api_key_env;  // name of the environment variable holding the key
  double timeout_s = 30.0;
  int max_retries = 3;
  double temperature = 0.7;
};

// OpenAI-compatible chat-completions client. Retries connection errors,
// HTTP 429 and 5xx with exponential backoff plus jitter; other statuses fail
// at once with a BackendError carrying the status and a body excerpt.
class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpConfig cfg);

  std::string complete(const Prompt& prompt, std::size_t max_decode_tokens,
                       int run) const override;
  std::string name() const override { return "http"; }

 private:
  HttpConfig cfg_;
};

}  // namespace dicho
