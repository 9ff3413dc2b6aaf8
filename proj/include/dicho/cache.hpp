// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "dicho/common.hpp"
#include "dicho/tokenizer.hpp"

namespace dicho {

struct CacheConfig {
  std::size_t block_size = 16;
  // nullopt means unbounded; 0 means nothing is ever stored.
  std::optional<std::size_t> capacity_blocks;
  bool record_events = false;
};

struct CacheStats {
  std::uint64_t lookups = 0;
  std::uint64_t hit_tokens = 0;
  std::uint64_t miss_tokens = 0;
  std::uint64_t insertions = 0;
  std::uint64_t evictions = 0;
};

struct CacheEvent {
  std::string op;  // "lookup" or "insert"
  std::string prompt_id;
  std::size_t tokens = 0;
  std::size_t hit_tokens = 0;
  std::size_t blocks_added = 0;
  std::size_t blocks_evicted = 0;
};

struct InsertResult {
  std::size_t blocks_added = 0;
  std::size_t blocks_evicted = 0;
};

// Block-granular prefix cache. Blocks are identified by a hash chained from
// the parent block, so two sequences sharing a token prefix share the leading
// chain. Only full blocks are stored; partial tails never hit. Eviction is
// LRU restricted to leaves, which keeps every stored block's parent stored.
// When the least-recently-used leaf is the tip of the chain currently being
// inserted, it is evicted anyway and the rest of that chain is abandoned.
class PrefixCache {
 public:
  explicit PrefixCache(CacheConfig cfg);

  // Returns hit token count: block_size times the longest stored chain
  // matching seq's leading full blocks. Refreshes LRU order of matched blocks.
  std::size_t lookup(const TokenSeq& seq, const std::string& prompt_id = {});

  InsertResult insert(const TokenSeq& seq, const std::string& prompt_id = {});

  const CacheStats& stats() const { return stats_; }
  void reset_stats() { stats_ = CacheStats{}; }
  std::size_t stored_blocks() const { return blocks_.size(); }
  const CacheConfig& config() const { return cfg_; }
  const std::vector<CacheEvent>& events() const { return events_; }
  void clear_events() { events_.clear(); }

  // Verifies chain integrity, capacity, child counts, and the LRU leaf index.
  void audit() const;

 private:
  struct StoredBlock {
    std::uint64_t parent = 0;
    std::uint64_t last_used = 0;
    std::uint32_t child_count = 0;
  };

  static std::uint64_t chain_hash(std::uint64_t parent, const TokenId* ids, std::size_t n);
  void touch(std::uint64_t hash);
  void evict_block(std::uint64_t hash);
  // LRU leaf, preferring leaves other than `exclude`; 0 when no leaf exists.
  std::uint64_t pick_victim(std::uint64_t exclude) const;

  CacheConfig cfg_;
  std::unordered_map<std::uint64_t, StoredBlock> blocks_;
  std::set<std::pair<std::uint64_t, std::uint64_t>> leaf_lru_;  // (last_used, hash)
  std::uint64_t tick_ = 0;
  CacheStats stats_;
  std::vector<CacheEvent> events_;
};

void write_events_jsonl(const std::vector<CacheEvent>& events, const std::string& path);

}  // namespace dicho
