#include "rsketch/mice_filter.hpp"

#include <algorithm>

#include "rsketch/hash.hpp"

namespace rsketch {

MiceFilter::MiceFilter(std::uint64_t width, Count cap, std::uint64_t seed, unsigned counter_bits)
    : width_(width),
      cap_(cap),
      seeds_{derive_seed(seed, 1), derive_seed(seed, 2)},
      counter_bits_(counter_bits) {
    if (width == 0) throw ConfigError("mice filter width must be positive");
    if (counter_bits == 0 || counter_bits > 32 || cap > field_max(counter_bits)) {
        throw ConfigError("mice filter cap does not fit its counter width");
    }
    counters_.assign(2 * width_, 0);
}

std::uint64_t MiceFilter::slot(unsigned row, Key key) const {
    return row * width_ + reduce(seeded_hash(seeds_[row], key), width_);
}

Count MiceFilter::insert(Key key, Count value) {
    std::uint32_t& c1 = counters_[slot(0, key)];
    std::uint32_t& c2 = counters_[slot(1, key)];
    const Count low = std::min(c1, c2);
    const Count absorbed = std::min(value, cap_ - low);
    if (absorbed == 0) return value;
    const Count target = low + absorbed;
    c1 = static_cast<std::uint32_t>(std::max<Count>(c1, target));
    c2 = static_cast<std::uint32_t>(std::max<Count>(c2, target));
    return value - absorbed;
}

BucketEstimate MiceFilter::query(Key key) const {
    const Count low = std::min(counters_[slot(0, key)], counters_[slot(1, key)]);
    return {low, low};
}

void MiceFilter::load_counters(std::span<const std::uint32_t> counters) {
    if (counters.size() != counters_.size()) throw FormatError("mice filter counter count mismatch");
    if (std::any_of(counters.begin(), counters.end(), [this](std::uint32_t c) { return c > cap_; })) {
        throw FormatError("mice filter counter above cap");
    }
    counters_.assign(counters.begin(), counters.end());
}

}  // namespace rsketch
