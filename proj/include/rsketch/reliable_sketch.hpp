#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "rsketch/bucket.hpp"
#include "rsketch/config.hpp"
#include "rsketch/mice_filter.hpp"
#include "rsketch/space_saving.hpp"
#include "rsketch/types.hpp"

namespace rsketch {

/// Certified answer to a point query: the true value lies in [lower, upper]
/// and lower = max(0, upper - mpe).
struct EstimateInterval {
    Count upper = 0;
    Count lower = 0;
    Count mpe = 0;
    bool stash_consulted = false;
    bool overflow_tainted = false;  // guarantees are void when set

    friend bool operator==(const EstimateInterval&, const EstimateInterval&) = default;
};

/// Intersects intervals reported for the same key by independent sketches.
/// Returns std::nullopt when the intervals are disjoint, i.e. the sketches
/// cannot have observed the same true value. Throws std::invalid_argument on
/// an empty list or a tainted interval.
std::optional<EstimateInterval> merge_intervals(std::span<const EstimateInterval> intervals);

struct InsertOutcome {
    enum class Kind { completed, stash, overflow };

    Kind kind = Kind::completed;
    unsigned layer = 0;  // logical layer (1-based) that took the last of the value
    Count residual = 0;  // value that went past the last layer

    friend bool operator==(const InsertOutcome&, const InsertOutcome&) = default;
};

/// Work counters. Not part of snapshots.
struct SketchStats {
    std::uint64_t inserts = 0;
    std::uint64_t bucket_layer_visits = 0;
    std::uint64_t hash_calls = 0;  // index hashes: two per filter pass, one per bucket layer
    std::uint64_t stash_inserts = 0;
    std::uint64_t overflows = 0;
    std::vector<std::uint64_t> completed_at_layer;  // by logical layer, 0-based
};

/// Multi-layer error-sensing frequency sketch. Every query returns an
/// interval that contains the key's true value sum as long as no value was
/// ever lost past the last layer, and its width never exceeds the
/// configured error threshold when the stash is not involved.
///
/// Buckets hold `id_bits`-wide fingerprints of keys; at 64 bits the
/// fingerprint is the key itself. Two keys with equal fingerprints that also
/// share a bucket are indistinguishable to that bucket, which can only
/// inflate estimates for the colliding pair.
///
/// One writer at a time; concurrent readers are fine while no writer runs.
class ReliableSketch {
public:
    explicit ReliableSketch(const SketchConfig& config);

    /// Precondition: value >= 1 (throws std::invalid_argument otherwise).
    /// Throws CounterOverflow if a YES counter would exceed its width; the
    /// sketch is marked overflowed in that case.
    InsertOutcome insert(Key key, Count value = 1);

    EstimateInterval query(Key key) const;

    const SketchConfig& config() const { return config_; }
    const Layout& layout() const { return layout_; }
    Count lambda_cap() const { return layout_.lambda_cap; }
    unsigned effective_depth() const { return layout_.effective_depth; }
    bool overflowed() const { return overflow_; }

    const SketchStats& stats() const { return stats_; }
    void reset_stats();

    std::size_t bucket_layer_count() const { return layers_.size(); }
    std::span<const Bucket> layer_buckets(std::size_t layer) const { return layers_[layer].buckets; }
    Count bucket_layer_threshold(std::size_t layer) const { return layers_[layer].threshold; }
    const std::optional<MiceFilter>& filter() const { return filter_; }
    const std::optional<SpaceSaving>& stash() const { return stash_; }

    Key fingerprint(Key key) const;

    /// Distinct keys held as candidates by any bucket or the stash. Needs
    /// full-width ids (id_bits == 64); throws ConfigError otherwise.
    std::vector<Key> recorded_keys() const;

    /// Portable little-endian encoding: "RSK1", version, config, layers,
    /// filter and stash.
    std::vector<std::uint8_t> snapshot() const;

    /// Throws FormatError on bad magic/version, truncation or when the
    /// stored configuration differs from `config`.
    static ReliableSketch restore(std::span<const std::uint8_t> bytes, const SketchConfig& config);
    /// Restores using the configuration stored in the snapshot.
    static ReliableSketch restore(std::span<const std::uint8_t> bytes);

    friend bool operator==(const ReliableSketch& a, const ReliableSketch& b);

private:
    struct Layer {
        std::uint64_t width;
        Count threshold;
        std::uint64_t seed;
        std::vector<Bucket> buckets;

        friend bool operator==(const Layer&, const Layer&) = default;
    };

    std::size_t slot(const Layer& layer, Key key) const;
    void record_completion(unsigned logical_layer);
    static ReliableSketch decode(std::span<const std::uint8_t> bytes, const SketchConfig* expected);

    SketchConfig config_;
    Layout layout_;
    std::vector<Layer> layers_;
    std::optional<MiceFilter> filter_;
    std::optional<SpaceSaving> stash_;
    std::uint64_t fingerprint_seed_;
    Count yes_limit_;
    unsigned first_bucket_layer_;  // logical index of layers_[0], 1-based
    bool overflow_ = false;
    SketchStats stats_;
};

/// Serializes a SketchConfig as stored in snapshots.
void encode_config(const SketchConfig& config, std::vector<std::uint8_t>& out);

}  // namespace rsketch
