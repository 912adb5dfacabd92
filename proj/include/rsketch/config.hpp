#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rsketch/types.hpp"

namespace rsketch {

/// Tuning parameters of a ReliableSketch. Exactly one of `total_buckets`
/// and `memory_bytes` sizes the structure; `lambda_cap` may be left empty
/// and derived from `n_hint`.
struct SketchConfig {
    std::optional<std::uint64_t> total_buckets;  // W
    std::optional<std::uint64_t> memory_bytes;
    double r_w = 2.0;
    double r_lambda = 2.5;
    std::optional<Count> lambda_cap;  // user error threshold
    unsigned depth = 7;
    std::uint64_t n_hint = 0;  // expected total inserted value
    std::uint64_t seed = 0;
    unsigned yes_bits = 32;
    unsigned no_bits = 16;
    unsigned id_bits = 32;
    unsigned filter_bits = 8;
    double mice_filter_fraction = 0.2;  // 0 disables the filter
    std::uint32_t stash_capacity = 64;  // 0 disables the stash

    bool filter_enabled() const { return mice_filter_fraction > 0.0; }
    std::uint64_t bucket_bytes() const { return (id_bits + yes_bits + no_bits) / 8; }
    std::uint64_t stash_entry_bytes() const { return (id_bits + 2 * yes_bits) / 8; }

    friend bool operator==(const SketchConfig&, const SketchConfig&) = default;
};

/// ceil(W (R_w - 1) / R_w^i), i is 1-based.
std::uint64_t layer_width(std::uint64_t total_buckets, double r_w, unsigned i);

/// floor(Lambda (R_lambda - 1) / R_lambda^i), i is 1-based.
Count layer_threshold(Count lambda_cap, double r_lambda, unsigned i);

/// (R_w R_lambda)^2 / ((R_w - 1)(R_lambda - 1)), the recommended sizing constant.
double recommended_constant(double r_w, double r_lambda);

/// Error threshold implied by a bucket budget: ceil(C N / W), at least 1.
Count derive_lambda(std::uint64_t total_buckets, std::uint64_t n_hint, double r_w, double r_lambda);

/// Bucket budget for a target error threshold: ceil(C N / Lambda).
std::uint64_t derive_W(Count lambda_cap, std::uint64_t n_hint, double r_w, double r_lambda);

/// The larger bucket budget used by the worst-case analysis:
/// ceil(4 (R_w R_lambda)^6 / ((R_w - 1)(R_lambda - 1)) N / Lambda).
std::uint64_t derive_W_proof(Count lambda_cap, std::uint64_t n_hint, double r_w, double r_lambda);

/// Emergency stash size that makes the all-keys guarantee hold with
/// probability 1 - delta: ceil(6 R_w^3 R_lambda^4 ln(1/delta)).
std::uint64_t stash_capacity_for(double r_w, double r_lambda, double delta);

struct LayerSpec {
    std::uint64_t width = 0;
    Count threshold = 0;
};

/// Concrete geometry resolved from a SketchConfig.
struct Layout {
    Count lambda_cap = 0;
    std::uint64_t total_buckets = 0;    // W, buckets shared by the bucket layers
    unsigned effective_depth = 0;       // logical layers kept after trimming (filter included)
    std::vector<LayerSpec> bucket_layers;
    std::uint64_t filter_width = 0;     // counters per filter array, 0 when disabled
    Count filter_cap = 0;               // lambda_1 when the filter is enabled

    /// Threshold of logical layer `i` (1-based); the filter is layer 1 when present.
    std::vector<Count> thresholds;
};

/// Validates `config` and computes the layer geometry. Throws ConfigError.
Layout resolve_layout(const SketchConfig& config);

}  // namespace rsketch
