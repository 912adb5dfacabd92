#pragma once

#include <cstdint>
#include <set>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "rsketch/bucket.hpp"
#include "rsketch/types.hpp"

namespace rsketch {

/// SpaceSaving summary with at most `capacity` monitored keys. Used both as
/// the emergency layer behind the last sketch layer and as a standalone
/// heavy-hitter baseline.
class SpaceSaving {
public:
    struct Entry {
        Key key = 0;
        Count count = 0;
        Count err = 0;  // overestimation inherited at replacement

        friend bool operator==(const Entry&, const Entry&) = default;
    };

    explicit SpaceSaving(std::size_t capacity);

    /// Adds `value` to `key`, evicting the minimum-count entry (lowest slot
    /// on ties) when the summary is full. Precondition: value >= 1.
    void insert(Key key, Count value);

    /// Present keys report (count, err). Absent keys report (m, m) where m is
    /// the minimum count when full and 0 otherwise.
    BucketEstimate query(Key key) const;

    bool contains(Key key) const { return index_.contains(key); }
    bool full() const { return entries_.size() == capacity_; }
    std::size_t size() const { return entries_.size(); }
    std::size_t capacity() const { return capacity_; }
    Count min_count() const;

    /// Entries in slot order.
    std::span<const Entry> entries() const { return entries_; }

    /// Rebuilds from serialized entries. Throws FormatError if they exceed
    /// capacity, repeat a key or carry err > count.
    void load_entries(std::span<const Entry> entries);

    friend bool operator==(const SpaceSaving& a, const SpaceSaving& b) {
        return a.capacity_ == b.capacity_ && a.entries_ == b.entries_;
    }

private:
    std::size_t capacity_;
    std::vector<Entry> entries_;
    std::unordered_map<Key, std::size_t> index_;
    std::set<std::pair<Count, std::size_t>> by_count_;  // (count, slot)
};

}  // namespace rsketch
