// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#include "dicho/tokenizer.hpp"

#include <random>

namespace dicho {

namespace {

enum class ByteClass { whitespace, punct, word };

inline ByteClass classify(unsigned char c) {
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v') {
    return ByteClass::whitespace;
  }
  // ASCII punctuation, including '_': one token per byte.
  if (c < 0x80 && ((c >= '!' && c <= '/') || (c >= ':' && c <= '@') ||
                   (c >= '[' && c <= '`') || (c >= '{' && c <= '~'))) {
    return ByteClass::punct;
  }
  if (c < 0x21) {
    return ByteClass::whitespace;  // remaining ASCII control bytes
  }
  return ByteClass::word;
}

template <typename Emit>
void segment(std::string_view text, Emit&& emit) {
  std::size_t i = 0;
  const std::size_t n = text.size();
  while (i < n) {
    const ByteClass cls = classify(static_cast<unsigned char>(text[i]));
    if (cls == ByteClass::whitespace) {
      ++i;
      continue;
    }
    if (cls == ByteClass::punct) {
      emit(text.substr(i, 1));
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < n && classify(static_cast<unsigned char>(text[j])) == ByteClass::word) {
      ++j;
    }
    emit(text.substr(i, j - i));
    i = j;
  }
}

}  // namespace

TokenSeq tokenize(std::string_view text) {
  TokenSeq seq;
  seq.source_hash = fnv1a64(text);
  seq.tokens.reserve(text.size() / 4 + 1);
  segment(text, [&](std::string_view tok) { seq.tokens.push_back(fnv1a64(tok)); });
  return seq;
}

std::size_t count_tokens(std::string_view text) {
  std::size_t n = 0;
  segment(text, [&](std::string_view) { ++n; });
  return n;
}

std::string synth_text(std::size_t n_tokens, std::uint64_t seed) {
  if (n_tokens == 0) {
    throw ContractViolation("synth_text: n_tokens must be >= 1");
  }
  // mt19937_64 is fully specified by the standard; raw draws with modulo keep
  // the output identical across library implementations.
  std::mt19937_64 rng(seed);
  std::string out;
  out.reserve(n_tokens * 7);
  for (std::size_t i = 0; i < n_tokens; ++i) {
    if (i > 0) {
      out.push_back(' ');
    }
    const std::size_t len = 3 + static_cast<std::size_t>(rng() % 6);
    for (std::size_t k = 0; k < len; ++k) {
      out.push_back(static_cast<char>('a' + rng() % 26));
    }
  }
  return out;
}

}  // namespace dicho
