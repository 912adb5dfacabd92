#include "rsketch/space_saving.hpp"

#include <algorithm>

namespace rsketch {

SpaceSaving::SpaceSaving(std::size_t capacity) : capacity_(capacity) {
    if (capacity == 0) throw ConfigError("SpaceSaving capacity must be positive");
    entries_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void SpaceSaving::insert(Key key, Count value) {
    if (auto it = index_.find(key); it != index_.end()) {
        Entry& e = entries_[it->second];
        by_count_.erase({e.count, it->second});
        e.count += value;
        by_count_.insert({e.count, it->second});
        return;
    }
    if (!full()) {
        const std::size_t slot = entries_.size();
        entries_.push_back({key, value, 0});
        index_.emplace(key, slot);
        by_count_.insert({value, slot});
        return;
    }
    // The set orders equal counts by slot, so begin() is the lowest slot.
    const auto [min, slot] = *by_count_.begin();
    by_count_.erase(by_count_.begin());
    Entry& victim = entries_[slot];
    index_.erase(victim.key);
    victim = {key, min + value, min};
    index_.emplace(key, slot);
    by_count_.insert({victim.count, slot});
}

BucketEstimate SpaceSaving::query(Key key) const {
    if (auto it = index_.find(key); it != index_.end()) {
        const Entry& e = entries_[it->second];
        return {e.count, e.err};
    }
    const Count bound = full() ? min_count() : 0;
    return {bound, bound};
}

Count SpaceSaving::min_count() const {
    return by_count_.empty() ? 0 : by_count_.begin()->first;
}

void SpaceSaving::load_entries(std::span<const Entry> entries) {
    if (entries.size() > capacity_) throw FormatError("stash holds more entries than its capacity");
    std::vector<Entry> fresh(entries.begin(), entries.end());
    std::unordered_map<Key, std::size_t> index;
    std::set<std::pair<Count, std::size_t>> by_count;
    for (std::size_t slot = 0; slot < fresh.size(); ++slot) {
        const Entry& e = fresh[slot];
        if (e.err > e.count || e.count == 0) throw FormatError("stash entry has inconsistent counts");
        if (!index.emplace(e.key, slot).second) throw FormatError("stash entry key repeated");
        by_count.insert({e.count, slot});
    }
    entries_ = std::move(fresh);
    index_ = std::move(index);
    by_count_ = std::move(by_count);
}

}  // namespace rsketch
