#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "rsketch/types.hpp"

namespace rsketch {

/// Rows of saturating 32-bit counters shared by the Count-Min and
/// conservative-update baselines. Both update rules keep every counter at or
/// above the true value of each key mapped to it, so queries never
/// underestimate. With equal dimensions and seed, CU counters never exceed
/// CM counters.
class CounterMatrix {
public:
    enum class Update : std::uint8_t { count_min = 0, conservative = 1 };

    static constexpr unsigned kFastRows = 3;
    static constexpr unsigned kAccurateRows = 16;
    static constexpr std::uint64_t kCounterBytes = 4;

    CounterMatrix(unsigned rows, std::uint64_t width, std::uint64_t seed, Update update = Update::count_min);

    /// Largest width whose counters fit in `memory_bytes`.
    static CounterMatrix with_memory(unsigned rows, std::uint64_t memory_bytes, std::uint64_t seed, Update update);

    /// Applies the configured update rule.
    void insert(Key key, Count value = 1);
    /// Adds `value` to every mapped counter.
    void insert_cm(Key key, Count value = 1);
    /// Raises each mapped counter to max(counter, min_mapped + value).
    void insert_cu(Key key, Count value = 1);

    /// Minimum over the mapped counters.
    Count query(Key key) const;

    unsigned rows() const { return rows_; }
    std::uint64_t width() const { return width_; }
    Update update() const { return update_; }
    std::span<const std::uint32_t> counters() const { return counters_; }

    /// "CMS1" container: magic, version, update rule, rows, width, seed, counters.
    std::vector<std::uint8_t> snapshot() const;
    static CounterMatrix restore(std::span<const std::uint8_t> bytes);

    friend bool operator==(const CounterMatrix&, const CounterMatrix&) = default;

private:
    std::size_t slot(unsigned row, Key key) const;

    unsigned rows_;
    std::uint64_t width_;
    std::uint64_t seed_;
    Update update_;
    std::vector<std::uint64_t> row_seeds_;
    std::vector<std::uint32_t> counters_;
};

}  // namespace rsketch
