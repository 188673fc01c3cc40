#pragma once

#include <condition_variable>
#include <cstdint>
#include <functional>
#include <list>
#include <memory>
#include <mutex>
#include <string>
#include <string_view>
#include <unordered_map>

#include "itr/index.hpp"
#include "itr/selector.hpp"

namespace itr {

struct CacheKey {
    std::string signature;
    bool operator==(const CacheKey& other) const { return signature == other.signature; }
};

/// Lowercase, trim, collapse whitespace runs to single spaces.
std::string normalize_query(std::string_view query);

/// Task signature: normalized query + domain hint + corpus version +
/// retrieval/selection config hash. Any corpus version change produces a
/// different key.
CacheKey make_cache_key(std::string_view query_text, std::string_view domain_hint,
                        std::string_view corpus_version, std::string_view config_hash);

/// Cached per step: the selection plus the re-ranked candidate pools the
/// discovery fallback re-selects from.
struct SelectionEntry {
    SelectionResult selection;
    std::vector<ScoredCandidate> instr_candidates;
    std::vector<ScoredCandidate> tool_candidates;
};

struct CacheStats {
    std::uint64_t hits = 0;
    std::uint64_t misses = 0;
    std::uint64_t evictions = 0;
    std::size_t size = 0;
    std::size_t capacity = 0;
};

/// LRU cache of selection entries with a single-flight guarantee: under
/// concurrent misses of one key the compute function runs exactly once and
/// every caller gets the same value.
class SelectionCache {
public:
    explicit SelectionCache(std::size_t capacity = 1024);

    /// Returns (entry, hit). Waiters on an in-flight compute count as hits.
    std::pair<SelectionEntry, bool> get_or_compute(const CacheKey& key,
                                                   const std::function<SelectionEntry()>& compute_fn);

    /// Trims to capacity (LRU order); returns the number evicted.
    std::size_t evict();
    void set_capacity(std::size_t capacity);
    void clear();
    CacheStats stats() const;

private:
    struct Slot {
        bool ready = false;
        bool failed = false;
        SelectionEntry value;
        std::exception_ptr error;
        std::condition_variable cv;
    };

    std::size_t evict_locked();

    mutable std::mutex mutex_;
    std::size_t capacity_;
    std::unordered_map<std::string, std::shared_ptr<Slot>> slots_;
    std::list<std::string> lru_; // most recent at front; ready slots only
    std::unordered_map<std::string, std::list<std::string>::iterator> lru_pos_;
    CacheStats stats_;
};

}  // namespace itr
