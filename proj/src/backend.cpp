// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#include "dicho/backend.hpp"

#include <cctype>
#include <chrono>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "dicho/common.hpp"
#include "httplib.h"
#include "json.hpp"

namespace dicho {

namespace {

using nlohmann::json;

std::string lower_ascii(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  for (unsigned char c : s) {
    out += static_cast<char>(std::tolower(c));
  }
  return out;
}

const std::string* find_part(const Prompt& prompt, PartRole role) {
  for (const PromptPart& p : prompt.parts) {
    if (p.role == role) {
      return &p.content;
    }
  }
  return nullptr;
}

// Uniform deviate in [0,1) keyed by (prompt identity, run, seed); stable
// across platforms so fault injection replays identically.
double fault_uniform(const std::string& rendered, int run, std::uint64_t seed) {
  std::uint64_t h = fnv1a64(rendered);
  h = fnv1a64_u64(static_cast<std::uint64_t>(run), h);
  h = fnv1a64_u64(seed, h);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

}  // namespace

RuleTable parse_oracle_rules(const std::string& json_text, const std::string& origin) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ValidationError(origin + ": rule table parse error: " + e.what());
  }
  if (!root.is_object()) {
    throw ValidationError(origin + ": rule table must be an object of label -> keyword list");
  }
  RuleTable rules;
  for (const auto& [label, value] : root.items()) {
    if (!value.is_array()) {
      throw ValidationError(origin + ": keywords of '" + label + "' must be an array");
    }
    std::vector<std::string> keywords;
    for (const auto& kw : value) {
      if (!kw.is_string() || kw.get<std::string>().empty()) {
        throw ValidationError(origin + ": keywords of '" + label +
                              "' must be non-empty strings");
      }
      keywords.push_back(lower_ascii(kw.get<std::string>()));
    }
    rules[label] = std::move(keywords);
  }
  return rules;
}

RuleTable load_oracle_rules(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_oracle_rules(buf.str(), path);
}

OracleBackend::OracleBackend(Taxonomy taxonomy, RuleTable rules, AnswerLexicon lexicon,
                             FaultConfig fault)
    : taxonomy_(std::move(taxonomy)),
      rules_(std::move(rules)),
      lexicon_(std::move(lexicon)),
      fault_(fault) {
  lexicon_.validate();
  for (const auto& [label, keywords] : rules_) {
    (void)keywords;
    if (!taxonomy_.index_of(label).has_value()) {
      throw ValidationError("oracle rules: unknown label '" + label + "'");
    }
  }
  if (fault_.p_truncate < 0.0 || fault_.p_truncate > 1.0) {
    throw ValidationError("oracle fault probability must be in [0,1]");
  }
}

bool OracleBackend::judge(const std::string& text, const std::string& label) const {
  auto it = rules_.find(label);
  if (it == rules_.end()) {
    return false;
  }
  const std::string haystack = lower_ascii(text);
  for (const std::string& kw : it->second) {
    if (haystack.find(kw) != std::string::npos) {
      return true;
    }
  }
  return false;
}

LabelVector OracleBackend::judge_all(const std::string& text) const {
  LabelVector v(taxonomy_.K());
  for (std::size_t i = 0; i < taxonomy_.K(); ++i) {
    v.set(i, judge(text, taxonomy_.label(i).name));
  }
  return v;
}

std::string OracleBackend::complete(const Prompt& prompt, std::size_t max_decode_tokens,
                                    int run) const {
  if (max_decode_tokens < 1) {
    throw ContractViolation("complete: max_decode_tokens must be >= 1");
  }
  const std::string* text = find_part(prompt, PartRole::text);
  if (text == nullptr) {
    throw ContractViolation("oracle: prompt has no text part");
  }
  if (prompt.strategy == Strategy::dichotomic) {
    if (prompt.target_label.empty()) {
      throw ContractViolation("oracle: dichotomic prompt has no target label");
    }
    return judge(*text, prompt.target_label) ? lexicon_.canonical_yes : lexicon_.canonical_no;
  }
  std::string body = render_json_object(taxonomy_, judge_all(*text));
  if (fault_.p_truncate > 0.0 &&
      fault_uniform(prompt.rendered, run, fault_.seed) < fault_.p_truncate) {
    body = body.substr(0, body.size() / 2);
  }
  return body;
}

ReplayBackend::ReplayBackend(const std::string& fixture_path) : origin_(fixture_path) {
  std::ifstream in(fixture_path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open fixture: " + fixture_path);
  }
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
      throw ValidationError(fixture_path + ":" + std::to_string(lineno) +
                            ": malformed fixture line: " + e.what());
    }
    if (!row.contains("prompt_sha256") || !row["prompt_sha256"].is_string() ||
        !row.contains("run") || !row["run"].is_number_integer() ||
        !row.contains("completion") || !row["completion"].is_string()) {
      throw ValidationError(fixture_path + ":" + std::to_string(lineno) +
                            ": fixture row needs prompt_sha256, run, completion");
    }
    const auto key = std::make_pair(row["prompt_sha256"].get<std::string>(),
                                    row["run"].get<int>());
    if (!completions_.emplace(key, row["completion"].get<std::string>()).second) {
      throw ValidationError(fixture_path + ":" + std::to_string(lineno) +
                            ": duplicate fixture key " + key.first + " run " +
                            std::to_string(key.second));
    }
  }
}

std::string ReplayBackend::complete(const Prompt& prompt, std::size_t max_decode_tokens,
                                    int run) const {
  if (max_decode_tokens < 1) {
    throw ContractViolation("complete: max_decode_tokens must be >= 1");
  }
  const std::string sha = sha256_hex(prompt.rendered);
  auto it = completions_.find({sha, run});
  if (it == completions_.end()) {
    throw ReplayMiss("replay fixture " + origin_ + " has no completion for prompt sha " + sha +
                     " run " + std::to_string(run));
  }
  return it->second;
}

HttpBackend::HttpBackend(HttpConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty()) {
    throw ValidationError("http backend: base_url is empty");
  }
  if (cfg_.max_retries < 0) {
    throw ValidationError("http backend: max_retries must be >= 0");
  }
}

std::string HttpBackend::complete(const Prompt& prompt, std::size_t max_decode_tokens,
                                  int run) const {
  if (max_decode_tokens < 1) {
    throw ContractViolation("complete: max_decode_tokens must be >= 1");
  }
  json body;
  body["model"] = cfg_.model;
  body["messages"] = json::array({json{{"role", "user"}, {"content", prompt.rendered}}});
  body["max_tokens"] = max_decode_tokens;
  body["temperature"] = cfg_.temperature;
  body["seed"] = run;
  const std::string payload = body.dump();

  httplib::Headers headers;
  if (!cfg_.api_key_env.empty()) {
    if (const char* key = std::getenv(cfg_.api_key_env.c_str())) {
      headers.emplace("Authorization", std::string("Bearer ") + key);
    }
  }

  std::string last_error;
  int last_status = 0;
  for (int attempt = 0; attempt <= cfg_.max_retries; ++attempt) {
    if (attempt > 0) {
      const std::uint64_t jitter =
          fnv1a64_u64(static_cast<std::uint64_t>(attempt), fnv1a64(prompt.rendered)) % 100;
      const auto delay = std::chrono::milliseconds((250u << (attempt - 1)) + jitter);
      std::this_thread::sleep_for(std::min<std::chrono::milliseconds>(
          delay, std::chrono::milliseconds(4000)));
    }
    httplib::Client client(cfg_.base_url);
    client.set_connection_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    client.set_read_timeout(std::chrono::duration<double>(cfg_.timeout_s));
    auto res = client.Post("/v1/chat/completions", headers, payload, "application/json");
    if (!res) {
      last_error = "connection error: " + httplib::to_string(res.error());
      last_status = 0;
      continue;
    }
    if (res->status == 429 || res->status >= 500) {
      last_error = "status " + std::to_string(res->status) + ": " + res->body.substr(0, 200);
      last_status = res->status;
      continue;
    }
    if (res->status != 200) {
      throw BackendError("http backend: status " + std::to_string(res->status) + ": " +
                             res->body.substr(0, 200),
                         res->status);
    }
    json reply;
    try {
      reply = json::parse(res->body);
    } catch (const json::parse_error& e) {
      throw BackendError(std::string("http backend: unparseable response body: ") + e.what(),
                         res->status);
    }
    if (!reply.contains("choices") || !reply["choices"].is_array() || reply["choices"].empty()) {
      throw BackendError("http backend: response has no choices", res->status);
    }
    const json& choice = reply["choices"][0];
    if (choice.contains("message") && choice["message"].contains("content") &&
        choice["message"]["content"].is_string()) {
      return choice["message"]["content"].get<std::string>();
    }
    if (choice.contains("text") && choice["text"].is_string()) {
      return choice["text"].get<std::string>();
    }
    throw BackendError("http backend: choice has no message content", res->status);
  }
  throw BackendError("http backend: retries exhausted; last " + last_error, last_status);
}

}  // namespace dicho
