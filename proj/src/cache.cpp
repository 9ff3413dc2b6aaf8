// Copyright (C) 2026 dicho contributors
// SPDX-License-Identifier: Apache-2.0

#include "dicho/cache.hpp"

#include <fstream>

#include "json.hpp"

namespace dicho {

PrefixCache::PrefixCache(CacheConfig cfg) : cfg_(cfg) {
  if (cfg_.block_size < 1) {
    throw ValidationError("cache: block_size must be >= 1");
  }
}

std::uint64_t PrefixCache::chain_hash(std::uint64_t parent, const TokenId* ids, std::size_t n) {
  std::uint64_t h = fnv1a64_u64(parent);
  for (std::size_t i = 0; i < n; ++i) {
    h = fnv1a64_u64(ids[i], h);
  }
  return h;
}

void PrefixCache::touch(std::uint64_t hash) {
  StoredBlock& b = blocks_.at(hash);
  const std::uint64_t now = ++tick_;
  if (b.child_count == 0) {
    leaf_lru_.erase({b.last_used, hash});
    leaf_lru_.insert({now, hash});
  }
  b.last_used = now;
}

std::uint64_t PrefixCache::pick_victim(std::uint64_t exclude) const {
  std::uint64_t fallback = 0;
  for (const auto& [tick, hash] : leaf_lru_) {
    (void)tick;
    if (hash != exclude) {
      return hash;
    }
    fallback = hash;
  }
  return fallback;
}

void PrefixCache::evict_block(std::uint64_t hash) {
  auto it = blocks_.find(hash);
  const StoredBlock b = it->second;
  leaf_lru_.erase({b.last_used, hash});
  blocks_.erase(it);
  if (b.parent != 0) {
    auto pit = blocks_.find(b.parent);
    if (pit != blocks_.end() && --pit->second.child_count == 0) {
      leaf_lru_.insert({pit->second.last_used, b.parent});
    }
  }
}

std::size_t PrefixCache::lookup(const TokenSeq& seq, const std::string& prompt_id) {
  ++stats_.lookups;
  const std::size_t bs = cfg_.block_size;
  const std::size_t n_full = seq.size() / bs;
  std::uint64_t parent = 0;
  std::size_t matched = 0;
  for (std::size_t i = 0; i < n_full; ++i) {
    const std::uint64_t h = chain_hash(parent, seq.tokens.data() + i * bs, bs);
    auto it = blocks_.find(h);
    if (it == blocks_.end() || it->second.parent != parent) {
      break;
    }
    touch(h);
    parent = h;
    ++matched;
  }
  const std::size_t hit = matched * bs;
  stats_.hit_tokens += hit;
  stats_.miss_tokens += seq.size() - hit;
  if (cfg_.record_events) {
    events_.push_back({"lookup", prompt_id, seq.size(), hit, 0, 0});
  }
  return hit;
}

InsertResult PrefixCache::insert(const TokenSeq& seq, const std::string& prompt_id) {
  InsertResult res;
  const std::size_t bs = cfg_.block_size;
  const std::size_t n_full = seq.size() / bs;
  std::uint64_t parent = 0;
  for (std::size_t i = 0; i < n_full; ++i) {
    const std::uint64_t h = chain_hash(parent, seq.tokens.data() + i * bs, bs);
    auto it = blocks_.find(h);
    if (it != blocks_.end()) {
      touch(h);
      parent = h;
      continue;
    }
    if (cfg_.capacity_blocks.has_value() && *cfg_.capacity_blocks == 0) {
      break;
    }
    bool abandoned = false;
    while (cfg_.capacity_blocks.has_value() && blocks_.size() >= *cfg_.capacity_blocks) {
      const std::uint64_t victim = pick_victim(parent);
      if (victim == 0) {
        abandoned = true;
        break;
      }
      const bool was_own_tip = (victim == parent);
      evict_block(victim);
      ++res.blocks_evicted;
      if (was_own_tip) {
        abandoned = true;
        break;
      }
    }
    if (abandoned) {
      break;
    }
    const std::uint64_t now = ++tick_;
    blocks_.emplace(h, StoredBlock{parent, now, 0});
    if (parent != 0) {
      StoredBlock& pb = blocks_.at(parent);
      if (pb.child_count++ == 0) {
        leaf_lru_.erase({pb.last_used, parent});
      }
    }
    leaf_lru_.insert({now, h});
    parent = h;
    ++res.blocks_added;
  }
  stats_.insertions += res.blocks_added;
  stats_.evictions += res.blocks_evicted;
  if (cfg_.record_events) {
    events_.push_back({"insert", prompt_id, seq.size(), 0, res.blocks_added, res.blocks_evicted});
  }
  return res;
}

void PrefixCache::audit() const {
  if (cfg_.capacity_blocks.has_value() && blocks_.size() > *cfg_.capacity_blocks) {
    throw ContractViolation("cache audit: stored blocks exceed capacity");
  }
  std::unordered_map<std::uint64_t, std::uint32_t> child_counts;
  for (const auto& [hash, b] : blocks_) {
    (void)hash;
    if (b.parent != 0) {
      if (blocks_.find(b.parent) == blocks_.end()) {
        throw ContractViolation("cache audit: orphan block (parent not stored)");
      }
      ++child_counts[b.parent];
    }
  }
  std::size_t leaf_count = 0;
  for (const auto& [hash, b] : blocks_) {
    const auto it = child_counts.find(hash);
    const std::uint32_t expect = (it == child_counts.end()) ? 0 : it->second;
    if (b.child_count != expect) {
      throw ContractViolation("cache audit: child_count mismatch");
    }
    if (expect == 0) {
      ++leaf_count;
      if (leaf_lru_.find({b.last_used, hash}) == leaf_lru_.end()) {
        throw ContractViolation("cache audit: leaf missing from LRU index");
      }
    }
  }
  if (leaf_lru_.size() != leaf_count) {
    throw ContractViolation("cache audit: stale entries in LRU index");
  }
}

void write_events_jsonl(const std::vector<CacheEvent>& events, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    throw IoError("cannot write file: " + path);
  }
  for (const CacheEvent& e : events) {
    nlohmann::ordered_json row;
    row["op"] = e.op;
    row["prompt_id"] = e.prompt_id;
    row["tokens"] = e.tokens;
    row["hit_tokens"] = e.hit_tokens;
    row["blocks_added"] = e.blocks_added;
    row["blocks_evicted"] = e.blocks_evicted;
    out << row.dump() << '\n';
  }
  if (!out) {
    throw IoError("short write: " + path);
  }
}

}  // namespace dicho
