#include "itr/cache.hpp"

#include <cctype>

#include "itr/hash.hpp"

namespace itr {

std::string normalize_query(std::string_view query) {
    std::string out;
    out.reserve(query.size());
    bool pending_space = false;
    for (unsigned char c : query) {
        if (std::isspace(c)) {
            pending_space = !out.empty();
            continue;
        }
        if (pending_space) {
            out.push_back(' ');
            pending_space = false;
        }
        out.push_back(static_cast<char>(std::tolower(c)));
    }
    return out;
}

CacheKey make_cache_key(std::string_view query_text, std::string_view domain_hint,
                        std::string_view corpus_version, std::string_view config_hash) {
    constexpr char sep = '\x1f';
    std::uint64_t state = fnv1a64(normalize_query(query_text));
    state = fnv1a64(std::string_view(&sep, 1), state);
    state = fnv1a64(domain_hint, state);
    state = fnv1a64(std::string_view(&sep, 1), state);
    state = fnv1a64(corpus_version, state);
    state = fnv1a64(std::string_view(&sep, 1), state);
    state = fnv1a64(config_hash, state);
    return CacheKey{hex64(state)};
}

SelectionCache::SelectionCache(std::size_t capacity) : capacity_(capacity) {
    stats_.capacity = capacity;
}

std::pair<SelectionEntry, bool> SelectionCache::get_or_compute(
    const CacheKey& key, const std::function<SelectionEntry()>& compute_fn) {
    std::shared_ptr<Slot> slot;
    bool owner = false;
    {
        std::unique_lock lock(mutex_);
        auto it = slots_.find(key.signature);
        if (it != slots_.end()) {
            slot = it->second;
            if (slot->ready && !slot->failed) {
                ++stats_.hits;
                auto pos = lru_pos_.find(key.signature);
                if (pos != lru_pos_.end()) {
                    lru_.splice(lru_.begin(), lru_, pos->second);
                    pos->second = lru_.begin();
                }
                return {slot->value, true};
            }
        } else {
            slot = std::make_shared<Slot>();
            slots_.emplace(key.signature, slot);
            owner = true;
            ++stats_.misses;
        }
        if (!owner) {
            // Another caller is computing this key; wait for its result.
            slot->cv.wait(lock, [&] { return slot->ready; });
            if (slot->failed) std::rethrow_exception(slot->error);
            ++stats_.hits;
            return {slot->value, true};
        }
    }

    try {
        SelectionEntry value = compute_fn();
        std::unique_lock lock(mutex_);
        slot->value = std::move(value);
        slot->ready = true;
        lru_.push_front(key.signature);
        lru_pos_[key.signature] = lru_.begin();
        evict_locked();
        slot->cv.notify_all();
        return {slot->value, false};
    } catch (...) {
        std::unique_lock lock(mutex_);
        slot->failed = true;
        slot->ready = true;
        slot->error = std::current_exception();
        slots_.erase(key.signature); // next call retries
        slot->cv.notify_all();
        throw;
    }
}

std::size_t SelectionCache::evict_locked() {
    std::size_t evicted = 0;
    while (lru_.size() > capacity_) {
        const std::string key = lru_.back();
        lru_.pop_back();
        lru_pos_.erase(key);
        slots_.erase(key);
        ++evicted;
        ++stats_.evictions;
    }
    return evicted;
}

std::size_t SelectionCache::evict() {
    std::unique_lock lock(mutex_);
    return evict_locked();
}

void SelectionCache::set_capacity(std::size_t capacity) {
    std::unique_lock lock(mutex_);
    capacity_ = capacity;
    stats_.capacity = capacity;
    evict_locked();
}

void SelectionCache::clear() {
    std::unique_lock lock(mutex_);
    slots_.clear();
    lru_.clear();
    lru_pos_.clear();
    stats_.size = 0;
}

CacheStats SelectionCache::stats() const {
    std::unique_lock lock(mutex_);
    CacheStats s = stats_;
    s.size = lru_.size();
    s.capacity = capacity_;
    return s;
}

}  // namespace itr
