// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "dicho/common.hpp"

namespace dicho {

using TokenId = std::uint64_t;

/// A tokenized string. Token ids are stable hashes of the segments, so equal
/// strings always produce equal sequences, on any platform.
struct TokenSeq {
  std::vector<TokenId> tokens;
  std::uint64_t source_hash = 0;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// Segmentation rule: runs of word bytes (ASCII alphanumerics, '_'-free
// punctuation excluded, and all bytes >= 0x80 so multi-byte UTF-8 stays glued)
// form one token; each ASCII punctuation byte is its own token; ASCII
// whitespace only separates. The rule guarantees prefix stability: a prompt
// that extends a prefix past a whitespace boundary tokenizes to the prefix's
// tokens followed by the suffix's tokens.
TokenSeq tokenize(std::string_view text);

/// Token count without materializing ids.
std::size_t count_tokens(std::string_view text);

/// Deterministic pseudo-random text of exactly `n_tokens` tokens: lowercase
/// letter words joined by single spaces, so every word is one token.
std::string synth_text(std::size_t n_tokens, std::uint64_t seed);

}  // namespace dicho
