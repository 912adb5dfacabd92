#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rsketch/bucket.hpp"
#include "rsketch/types.hpp"

namespace rsketch {

/// Two-row conservative-update counter filter that saturates at `cap`.
/// It stands in for the first sketch layer and soaks up small keys; once
/// both counters of a key are saturated its traffic passes through.
class MiceFilter {
public:
    /// Throws ConfigError if `cap` does not fit in `counter_bits` or width is 0.
    MiceFilter(std::uint64_t width, Count cap, std::uint64_t seed, unsigned counter_bits = 8);

    /// Absorbs as much of `value` as the key's counters allow and returns
    /// the remainder to forward downstream (0 when fully absorbed).
    Count insert(Key key, Count value);

    /// The absorbed value of `key` lies in [0, estimate]; estimate == mpe.
    BucketEstimate query(Key key) const;

    std::uint64_t width() const { return width_; }
    Count cap() const { return cap_; }
    unsigned counter_bits() const { return counter_bits_; }

    /// Row-major counters: row 0 then row 1, each `width()` long.
    std::span<const std::uint32_t> counters() const { return counters_; }
    /// Replaces all counters; throws FormatError on size mismatch or a value above cap.
    void load_counters(std::span<const std::uint32_t> counters);

    friend bool operator==(const MiceFilter&, const MiceFilter&) = default;

private:
    std::uint64_t slot(unsigned row, Key key) const;

    std::uint64_t width_;
    Count cap_;
    std::uint64_t seeds_[2];
    unsigned counter_bits_;
    std::vector<std::uint32_t> counters_;
};

}  // namespace rsketch
