#pragma once

#include <optional>

#include "rsketch/types.hpp"

namespace rsketch {

/// Point estimate for one key together with its maximum possible error.
/// The true value lies in [estimate - mpe, estimate].
struct BucketEstimate {
    Count estimate = 0;
    Count mpe = 0;

    friend bool operator==(const BucketEstimate&, const BucketEstimate&) = default;
};

/// Error-sensible bucket. `id` is the candidate elected by voting, `yes`
/// counts votes for it and `no` counts votes against it. Any key other than
/// `id` has a true value of at most `no`, and `id` has a true value in
/// [yes - no, yes].
///
/// Single writer; callers serialize access.
struct Bucket {
    std::optional<Key> id;
    Count yes = 0;
    Count no = 0;

    bool empty() const { return !id.has_value(); }
    bool holds(Key key) const { return id == key; }

    /// Votes `value` units for `key`. A matching id gains `value` YES votes;
    /// otherwise NO grows by `value` and, once NO catches up with YES, `key`
    /// takes over the bucket and the two counters swap.
    ///
    /// Returns false, leaving the bucket untouched, if a counter would exceed
    /// `limit`. Precondition: value >= 1.
    [[nodiscard]] bool insert(Key key, Count value, Count limit = field_max(64)) {
        if (holds(key)) {
            if (value > limit - yes) return false;
            yes += value;
            return true;
        }
        if (value > limit - no) return false;
        const Count voted = no + value;
        if (voted >= yes) {
            id = key;
            no = yes;
            yes = voted;
        } else {
            no = voted;
        }
        return true;
    }

    BucketEstimate query(Key key) const {
        return {holds(key) ? yes : no, no};
    }

    friend bool operator==(const Bucket&, const Bucket&) = default;
};

}  // namespace rsketch
