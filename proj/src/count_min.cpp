#include "rsketch/count_min.hpp"

#include <algorithm>
#include <limits>
#include <string>

#include "rsketch/byte_io.hpp"
#include "rsketch/hash.hpp"

namespace rsketch {
namespace {

constexpr std::string_view kMagic = "CMS1";
constexpr std::uint16_t kVersion = 1;
constexpr Count kCounterMax = std::numeric_limits<std::uint32_t>::max();

std::uint32_t saturate(Count v) {
    return static_cast<std::uint32_t>(std::min(v, kCounterMax));
}

}  // namespace

CounterMatrix::CounterMatrix(unsigned rows, std::uint64_t width, std::uint64_t seed, Update update)
    : rows_(rows), width_(width), seed_(seed), update_(update) {
    if (rows == 0 || width == 0) throw ConfigError("counter matrix needs at least one row and column");
    row_seeds_.reserve(rows);
    for (unsigned r = 0; r < rows; ++r) row_seeds_.push_back(derive_seed(seed, r + 1));
    counters_.assign(rows * width, 0);
}

CounterMatrix CounterMatrix::with_memory(unsigned rows, std::uint64_t memory_bytes, std::uint64_t seed, Update update) {
    if (rows == 0) throw ConfigError("counter matrix needs at least one row");
    const std::uint64_t width = memory_bytes / (kCounterBytes * rows);
    if (width == 0) throw ConfigError("memory_bytes too small for the requested rows");
    return CounterMatrix(rows, width, seed, update);
}

std::size_t CounterMatrix::slot(unsigned row, Key key) const {
    return row * width_ + static_cast<std::size_t>(reduce(seeded_hash(row_seeds_[row], key), width_));
}

void CounterMatrix::insert(Key key, Count value) {
    if (update_ == Update::conservative) {
        insert_cu(key, value);
    } else {
        insert_cm(key, value);
    }
}

void CounterMatrix::insert_cm(Key key, Count value) {
    for (unsigned r = 0; r < rows_; ++r) {
        std::uint32_t& c = counters_[slot(r, key)];
        c = saturate(Count{c} + value);
    }
}

void CounterMatrix::insert_cu(Key key, Count value) {
    // Rows are few (3 or 16); a fixed buffer avoids an allocation per insert.
    std::size_t slots[64];
    std::vector<std::size_t> spill;
    std::size_t* idx = slots;
    if (rows_ > 64) {
        spill.resize(rows_);
        idx = spill.data();
    }
    Count low = kCounterMax;
    for (unsigned r = 0; r < rows_; ++r) {
        idx[r] = slot(r, key);
        low = std::min<Count>(low, counters_[idx[r]]);
    }
    const std::uint32_t target = saturate(low + value);
    for (unsigned r = 0; r < rows_; ++r) {
        counters_[idx[r]] = std::max(counters_[idx[r]], target);
    }
}

Count CounterMatrix::query(Key key) const {
    Count low = kCounterMax;
    for (unsigned r = 0; r < rows_; ++r) low = std::min<Count>(low, counters_[slot(r, key)]);
    return low;
}

std::vector<std::uint8_t> CounterMatrix::snapshot() const {
    ByteWriter w;
    w.raw(kMagic);
    w.u16(kVersion);
    w.u8(static_cast<std::uint8_t>(update_));
    w.u32(rows_);
    w.u64(width_);
    w.u64(seed_);
    w.u8(32);
    for (std::uint32_t c : counters_) w.u32(c);
    return w.take();
}

CounterMatrix CounterMatrix::restore(std::span<const std::uint8_t> bytes) {
    ByteReader r(bytes);
    if (r.remaining() < kMagic.size() || r.raw(kMagic.size()) != kMagic) throw FormatError("bad counter matrix magic");
    if (r.u16() != kVersion) throw FormatError("unsupported counter matrix version");
    const std::uint8_t update = r.u8();
    if (update > 1) throw FormatError("unknown update rule");
    const std::uint32_t rows = r.u32();
    const std::uint64_t width = r.u64();
    const std::uint64_t seed = r.u64();
    if (r.u8() != 32) throw FormatError("unsupported counter width");
    if (rows == 0 || width == 0 || r.remaining() / 4 / rows < width) throw FormatError("truncated counter matrix");
    CounterMatrix m(rows, width, seed, static_cast<Update>(update));
    for (auto& c : m.counters_) c = r.u32();
    if (r.remaining() != 0) throw FormatError("trailing bytes after counter matrix");
    return m;
}

}  // namespace rsketch
