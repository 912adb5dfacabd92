#include "rsketch/reliable_sketch.hpp"

#include <algorithm>
#include <stdexcept>
#include <string>

#include "rsketch/byte_io.hpp"
#include "rsketch/hash.hpp"

namespace rsketch {
namespace {

constexpr std::string_view kMagic = "RSK1";
constexpr std::uint16_t kVersion = 1;
constexpr std::uint64_t kFingerprintSeedIndex = 0xf1f1f1f1ULL;
constexpr std::uint64_t kFilterSeedIndex = 0xf11e7ULL;

void write_optional(ByteWriter& w, const std::optional<std::uint64_t>& v) {
    w.u8(v.has_value() ? 1 : 0);
    w.u64(v.value_or(0));
}

std::optional<std::uint64_t> read_optional(ByteReader& r) {
    const std::uint8_t present = r.u8();
    const std::uint64_t v = r.u64();
    if (present > 1) throw FormatError("bad optional flag in config block");
    return present ? std::optional<std::uint64_t>(v) : std::nullopt;
}

SketchConfig read_config(ByteReader& r) {
    SketchConfig c;
    c.total_buckets = read_optional(r);
    c.memory_bytes = read_optional(r);
    c.r_w = r.f64();
    c.r_lambda = r.f64();
    c.lambda_cap = read_optional(r);
    c.depth = r.u32();
    c.n_hint = r.u64();
    c.seed = r.u64();
    c.yes_bits = r.u8();
    c.no_bits = r.u8();
    c.id_bits = r.u8();
    c.filter_bits = r.u8();
    c.mice_filter_fraction = r.f64();
    c.stash_capacity = r.u32();
    return c;
}

}  // namespace

void encode_config(const SketchConfig& c, std::vector<std::uint8_t>& out) {
    ByteWriter w;
    write_optional(w, c.total_buckets);
    write_optional(w, c.memory_bytes);
    w.f64(c.r_w);
    w.f64(c.r_lambda);
    write_optional(w, c.lambda_cap);
    w.u32(c.depth);
    w.u64(c.n_hint);
    w.u64(c.seed);
    w.u8(static_cast<std::uint8_t>(c.yes_bits));
    w.u8(static_cast<std::uint8_t>(c.no_bits));
    w.u8(static_cast<std::uint8_t>(c.id_bits));
    w.u8(static_cast<std::uint8_t>(c.filter_bits));
    w.f64(c.mice_filter_fraction);
    w.u32(c.stash_capacity);
    const auto& bytes = w.buffer();
    out.insert(out.end(), bytes.begin(), bytes.end());
}

std::optional<EstimateInterval> merge_intervals(std::span<const EstimateInterval> intervals) {
    if (intervals.empty()) throw std::invalid_argument("merge_intervals needs at least one interval");
    EstimateInterval merged = intervals.front();
    for (const auto& iv : intervals) {
        if (iv.overflow_tainted) throw std::invalid_argument("cannot merge a tainted interval");
        merged.upper = std::min(merged.upper, iv.upper);
        merged.lower = std::max(merged.lower, iv.lower);
        merged.stash_consulted = merged.stash_consulted || iv.stash_consulted;
    }
    if (merged.lower > merged.upper) return std::nullopt;
    merged.mpe = merged.upper - merged.lower;
    return merged;
}

ReliableSketch::ReliableSketch(const SketchConfig& config)
    : config_(config),
      layout_(resolve_layout(config)),
      fingerprint_seed_(derive_seed(config.seed, kFingerprintSeedIndex)),
      yes_limit_(field_max(config.yes_bits)),
      first_bucket_layer_(config.filter_enabled() ? 2 : 1) {
    if (config_.filter_enabled()) {
        filter_.emplace(layout_.filter_width, layout_.filter_cap, derive_seed(config.seed, kFilterSeedIndex),
                        config.filter_bits);
    }
    if (config_.stash_capacity > 0) stash_.emplace(config_.stash_capacity);

    layers_.reserve(layout_.bucket_layers.size());
    for (std::size_t i = 0; i < layout_.bucket_layers.size(); ++i) {
        const LayerSpec& spec = layout_.bucket_layers[i];
        const std::uint64_t logical = first_bucket_layer_ + i;
        layers_.push_back({spec.width, spec.threshold, derive_seed(config.seed, logical),
                           std::vector<Bucket>(spec.width)});
    }
    stats_.completed_at_layer.assign(layout_.effective_depth, 0);
}

Key ReliableSketch::fingerprint(Key key) const {
    if (config_.id_bits >= 64) return key;
    return seeded_hash(fingerprint_seed_, key) & field_max(config_.id_bits);
}

std::size_t ReliableSketch::slot(const Layer& layer, Key key) const {
    return static_cast<std::size_t>(reduce(seeded_hash(layer.seed, key), layer.width));
}

void ReliableSketch::record_completion(unsigned logical_layer) {
    ++stats_.completed_at_layer[logical_layer - 1];
}

void ReliableSketch::reset_stats() {
    stats_ = SketchStats{};
    stats_.completed_at_layer.assign(layout_.effective_depth, 0);
}

InsertOutcome ReliableSketch::insert(Key key, Count value) {
    if (value == 0) throw std::invalid_argument("inserted value must be >= 1");
    if (value > yes_limit_) {
        throw CounterOverflow("value " + std::to_string(value) + " does not fit the YES field");
    }
    ++stats_.inserts;
    Count remaining = value;

    if (filter_) {
        stats_.hash_calls += 2;
        remaining = filter_->insert(key, remaining);
        if (remaining == 0) {
            record_completion(1);
            return {InsertOutcome::Kind::completed, 1, 0};
        }
    }

    const Key fp = fingerprint(key);
    for (std::size_t i = 0; i < layers_.size(); ++i) {
        Layer& layer = layers_[i];
        ++stats_.bucket_layer_visits;
        ++stats_.hash_calls;
        Bucket& b = layer.buckets[slot(layer, key)];
        const Count lambda = layer.threshold;

        if (!b.holds(fp) && b.no + remaining > lambda && b.yes > lambda) {
            // Locked: the bucket takes what fits under lambda and the excess
            // moves on. The excess is computed from NO before it is raised.
            remaining -= lambda - b.no;
            b.no = lambda;
            continue;
        }
        if (!b.insert(fp, remaining, yes_limit_)) {
            overflow_ = true;
            throw CounterOverflow("YES counter saturated in layer " + std::to_string(first_bucket_layer_ + i));
        }
        const auto logical = static_cast<unsigned>(first_bucket_layer_ + i);
        record_completion(logical);
        return {InsertOutcome::Kind::completed, logical, 0};
    }

    if (stash_) {
        ++stats_.stash_inserts;
        stash_->insert(fp, remaining);
        return {InsertOutcome::Kind::stash, 0, remaining};
    }
    ++stats_.overflows;
    overflow_ = true;
    return {InsertOutcome::Kind::overflow, 0, remaining};
}

EstimateInterval ReliableSketch::query(Key key) const {
    EstimateInterval out;
    out.overflow_tainted = overflow_;
    bool stopped = false;

    if (filter_) {
        const BucketEstimate f = filter_->query(key);
        out.upper += f.estimate;
        out.mpe += f.mpe;
        // An unsaturated pair means the key never had value forwarded.
        stopped = f.estimate < filter_->cap();
    }

    const Key fp = fingerprint(key);
    for (std::size_t i = 0; i < layers_.size() && !stopped; ++i) {
        const Layer& layer = layers_[i];
        const Bucket& b = layer.buckets[slot(layer, key)];
        const BucketEstimate e = b.query(fp);
        out.upper += e.estimate;
        out.mpe += e.mpe;
        stopped = b.no < layer.threshold || b.yes == b.no || b.holds(fp);
    }

    if (!stopped && stash_) {
        const BucketEstimate s = stash_->query(fp);
        out.upper += s.estimate;
        out.mpe += s.mpe;
        out.stash_consulted = true;
    }
    out.lower = out.upper > out.mpe ? out.upper - out.mpe : 0;
    return out;
}

std::vector<Key> ReliableSketch::recorded_keys() const {
    if (config_.id_bits < 64) {
        throw ConfigError("recorded keys are only recoverable with 64-bit ids");
    }
    std::vector<Key> keys;
    for (const Layer& layer : layers_) {
        for (const Bucket& b : layer.buckets) {
            if (b.id) keys.push_back(*b.id);
        }
    }
    if (stash_) {
        for (const auto& e : stash_->entries()) keys.push_back(e.key);
    }
    std::sort(keys.begin(), keys.end());
    keys.erase(std::unique(keys.begin(), keys.end()), keys.end());
    return keys;
}

std::vector<std::uint8_t> ReliableSketch::snapshot() const {
    ByteWriter w;
    w.raw(kMagic);
    w.u16(kVersion);
    encode_config(config_, w.buffer());
    w.u8(overflow_ ? 1 : 0);

    const unsigned id_bytes = config_.id_bits / 8;
    const unsigned yes_bytes = config_.yes_bits / 8;
    const unsigned no_bytes = config_.no_bits / 8;
    w.u32(static_cast<std::uint32_t>(layers_.size()));
    for (const Layer& layer : layers_) {
        w.u64(layer.width);
        for (const Bucket& b : layer.buckets) {
            w.uint(b.id.value_or(0), id_bytes);
            w.uint(b.yes, yes_bytes);
            w.uint(b.no, no_bytes);
        }
    }

    w.u8(filter_ ? 1 : 0);
    if (filter_) {
        const unsigned counter_bytes = filter_->counter_bits() / 8;
        w.u64(filter_->width());
        for (std::uint32_t c : filter_->counters()) w.uint(c, counter_bytes);
    }

    w.u8(stash_ ? 1 : 0);
    if (stash_) {
        w.u32(static_cast<std::uint32_t>(stash_->capacity()));
        w.u32(static_cast<std::uint32_t>(stash_->size()));
        for (const auto& e : stash_->entries()) {
            w.uint(e.key, id_bytes);
            w.u64(e.count);
            w.u64(e.err);
        }
    }
    return w.take();
}

ReliableSketch ReliableSketch::restore(std::span<const std::uint8_t> bytes, const SketchConfig& config) {
    return decode(bytes, &config);
}

ReliableSketch ReliableSketch::restore(std::span<const std::uint8_t> bytes) {
    return decode(bytes, nullptr);
}

ReliableSketch ReliableSketch::decode(std::span<const std::uint8_t> bytes, const SketchConfig* expected) {
    ByteReader r(bytes);
    if (r.remaining() < kMagic.size() || r.raw(kMagic.size()) != kMagic) {
        throw FormatError("bad snapshot magic");
    }
    if (const auto version = r.u16(); version != kVersion) {
        throw FormatError("unsupported snapshot version " + std::to_string(version));
    }
    const std::size_t config_start = r.position();
    const SketchConfig config = read_config(r);
    if (expected) {
        std::vector<std::uint8_t> want;
        encode_config(*expected, want);
        const auto stored = bytes.subspan(config_start, r.position() - config_start);
        if (!std::equal(stored.begin(), stored.end(), want.begin(), want.end())) {
            throw FormatError("snapshot was taken with a different configuration");
        }
    }

    std::optional<ReliableSketch> built;
    try {
        built.emplace(config);
    } catch (const ConfigError& e) {
        throw FormatError(std::string("snapshot holds an invalid configuration: ") + e.what());
    }
    ReliableSketch& sketch = *built;

    const std::uint8_t overflow = r.u8();
    if (overflow > 1) throw FormatError("bad overflow flag");
    sketch.overflow_ = overflow == 1;

    const unsigned id_bytes = config.id_bits / 8;
    const unsigned yes_bytes = config.yes_bits / 8;
    const unsigned no_bytes = config.no_bits / 8;
    if (r.u32() != sketch.layers_.size()) throw FormatError("snapshot layer count mismatch");
    for (Layer& layer : sketch.layers_) {
        if (r.u64() != layer.width) throw FormatError("snapshot layer width mismatch");
        for (Bucket& b : layer.buckets) {
            const Key id = r.uint(id_bytes);
            b.yes = r.uint(yes_bytes);
            b.no = r.uint(no_bytes);
            if (b.yes == 0) {
                if (b.no != 0 || id != 0) throw FormatError("empty bucket with nonzero fields");
                b.id.reset();
            } else {
                if (b.no > b.yes || b.no > layer.threshold) throw FormatError("bucket violates NO bounds");
                b.id = id;
            }
        }
    }

    const std::uint8_t has_filter = r.u8();
    if (has_filter != (sketch.filter_ ? 1 : 0)) throw FormatError("snapshot filter presence mismatch");
    if (sketch.filter_) {
        if (r.u64() != sketch.filter_->width()) throw FormatError("snapshot filter width mismatch");
        const unsigned counter_bytes = sketch.filter_->counter_bits() / 8;
        std::vector<std::uint32_t> counters(2 * sketch.filter_->width());
        for (auto& c : counters) c = static_cast<std::uint32_t>(r.uint(counter_bytes));
        sketch.filter_->load_counters(counters);
    }

    const std::uint8_t has_stash = r.u8();
    if (has_stash != (sketch.stash_ ? 1 : 0)) throw FormatError("snapshot stash presence mismatch");
    if (sketch.stash_) {
        if (r.u32() != sketch.stash_->capacity()) throw FormatError("snapshot stash capacity mismatch");
        const std::uint32_t n = r.u32();
        if (n > sketch.stash_->capacity()) throw FormatError("snapshot stash overfull");
        std::vector<SpaceSaving::Entry> entries(n);
        for (auto& e : entries) {
            e.key = r.uint(id_bytes);
            e.count = r.u64();
            e.err = r.u64();
        }
        sketch.stash_->load_entries(entries);
    }

    if (r.remaining() != 0) throw FormatError("trailing bytes after snapshot");
    return std::move(*built);
}

bool operator==(const ReliableSketch& a, const ReliableSketch& b) {
    return a.config_ == b.config_ && a.overflow_ == b.overflow_ && a.layers_ == b.layers_ &&
           a.filter_ == b.filter_ && a.stash_ == b.stash_;
}

}  // namespace rsketch
