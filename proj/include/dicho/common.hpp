// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>

namespace dicho {

/// Input data or configuration violates a documented invariant. CLI exit code 1.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what) : std::runtime_error(what) {}
};

/// Filesystem problem: missing file, unreadable, short write.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

/// A caller broke an API precondition (programming error, not data error).
class ContractViolation : public std::logic_error {
 public:
  explicit ContractViolation(const std::string& what) : std::logic_error(what) {}
};

/// Backend could not produce a completion after retries. CLI exit code 2.
class BackendError : public std::runtime_error {
 public:
  BackendError(const std::string& what, int status = 0)
      : std::runtime_error(what), status_(status) {}
  int status() const { return status_; }

 private:
  int status_;
};

/// Replay fixture has no completion recorded for a (prompt hash, run) key.
class ReplayMiss : public BackendError {
 public:
  explicit ReplayMiss(const std::string& what) : BackendError(what) {}
};

// 64-bit FNV-1a. Used for token ids, content hashes and cache block chains;
// stable across platforms because it only ever sees explicit bytes.
inline constexpr std::uint64_t kFnvOffset = 1469598103934665603ull;
inline constexpr std::uint64_t kFnvPrime = 1099511628211ull;

inline constexpr std::uint64_t fnv1a64(std::string_view bytes, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= static_cast<std::uint64_t>(c);
    h *= kFnvPrime;
  }
  return h;
}

inline constexpr std::uint64_t fnv1a64_u64(std::uint64_t value, std::uint64_t seed = kFnvOffset) {
  std::uint64_t h = seed;
  for (int i = 0; i < 8; ++i) {
    h ^= (value >> (8 * i)) & 0xffull;
    h *= kFnvPrime;
  }
  return h;
}

/// Hex-encoded SHA-256 of a byte string (prompt identity for replay fixtures).
std::string sha256_hex(std::string_view bytes);

}  // namespace dicho
