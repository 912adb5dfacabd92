#include "rsketch/config.hpp"

#include <cmath>
#include <string>

namespace rsketch {
namespace {

// Absorbs representation error so that exact products such as 25 * 1.5 / 2.5
// round to the intended integer.
constexpr double kRoundingSlack = 1e-9;

std::uint64_t ceil_count(double x) {
    const double c = std::ceil(x - kRoundingSlack);
    return c <= 0.0 ? 0 : static_cast<std::uint64_t>(c);
}

std::uint64_t floor_count(double x) {
    const double f = std::floor(x + kRoundingSlack);
    return f <= 0.0 ? 0 : static_cast<std::uint64_t>(f);
}

bool valid_field(unsigned bits) {
    return bits >= 8 && bits <= 64 && bits % 8 == 0;
}

void require(bool ok, const std::string& message) {
    if (!ok) throw ConfigError(message);
}

}  // namespace

std::uint64_t layer_width(std::uint64_t total_buckets, double r_w, unsigned i) {
    const double w = static_cast<double>(total_buckets) * (r_w - 1.0) / std::pow(r_w, i);
    const std::uint64_t c = ceil_count(w);
    return c == 0 ? 1 : c;
}

Count layer_threshold(Count lambda_cap, double r_lambda, unsigned i) {
    return floor_count(static_cast<double>(lambda_cap) * (r_lambda - 1.0) / std::pow(r_lambda, i));
}

double recommended_constant(double r_w, double r_lambda) {
    const double p = r_w * r_lambda;
    return p * p / ((r_w - 1.0) * (r_lambda - 1.0));
}

Count derive_lambda(std::uint64_t total_buckets, std::uint64_t n_hint, double r_w, double r_lambda) {
    require(total_buckets > 0 && n_hint > 0, "derive_lambda needs positive W and N");
    const Count lambda = ceil_count(recommended_constant(r_w, r_lambda) * static_cast<double>(n_hint) /
                                    static_cast<double>(total_buckets));
    return lambda < 1 ? 1 : lambda;
}

std::uint64_t derive_W(Count lambda_cap, std::uint64_t n_hint, double r_w, double r_lambda) {
    require(lambda_cap > 0 && n_hint > 0, "derive_W needs positive lambda and N");
    return ceil_count(recommended_constant(r_w, r_lambda) * static_cast<double>(n_hint) /
                      static_cast<double>(lambda_cap));
}

std::uint64_t derive_W_proof(Count lambda_cap, std::uint64_t n_hint, double r_w, double r_lambda) {
    require(lambda_cap > 0 && n_hint > 0, "derive_W_proof needs positive lambda and N");
    const double c = 4.0 * std::pow(r_w * r_lambda, 6) / ((r_w - 1.0) * (r_lambda - 1.0));
    return ceil_count(c * static_cast<double>(n_hint) / static_cast<double>(lambda_cap));
}

std::uint64_t stash_capacity_for(double r_w, double r_lambda, double delta) {
    require(delta > 0.0 && delta < 1.0, "failure probability must lie in (0, 1)");
    return ceil_count(6.0 * std::pow(r_w, 3) * std::pow(r_lambda, 4) * std::log(1.0 / delta));
}

Layout resolve_layout(const SketchConfig& config) {
    require(config.r_w > 1.0, "r_w must be > 1");
    require(config.r_lambda > 1.0, "r_lambda must be > 1");
    require(config.depth >= 1, "depth must be >= 1");
    require(valid_field(config.id_bits) && valid_field(config.yes_bits) && valid_field(config.no_bits),
            "id/yes/no widths must be multiples of 8 in [8, 64]");
    require(config.filter_bits == 8 || config.filter_bits == 16 || config.filter_bits == 32,
            "filter_bits must be 8, 16 or 32");
    require(config.mice_filter_fraction >= 0.0 && config.mice_filter_fraction < 1.0,
            "mice_filter_fraction must lie in [0, 1)");
    require(config.total_buckets.has_value() != config.memory_bytes.has_value(),
            "exactly one of total_buckets and memory_bytes must be set");

    Layout layout;
    const std::uint64_t counter_bytes = config.filter_bits / 8;
    std::uint64_t filter_bytes = 0;

    if (config.total_buckets) {
        require(*config.total_buckets > 0, "total_buckets must be positive");
        layout.total_buckets = *config.total_buckets;
        if (config.filter_enabled()) {
            // The filter takes `fraction` of the memory that filter plus buckets occupy.
            const double bucket_mem = static_cast<double>(layout.total_buckets * config.bucket_bytes());
            filter_bytes = ceil_count(config.mice_filter_fraction / (1.0 - config.mice_filter_fraction) * bucket_mem);
        }
    } else {
        const std::uint64_t memory = *config.memory_bytes;
        require(memory > 0, "memory_bytes must be positive");
        if (config.filter_enabled()) {
            filter_bytes = floor_count(config.mice_filter_fraction * static_cast<double>(memory));
        }
        const std::uint64_t stash_bytes = std::uint64_t{config.stash_capacity} * config.stash_entry_bytes();
        require(memory > filter_bytes + stash_bytes, "memory_bytes too small for filter and stash");
        layout.total_buckets = (memory - filter_bytes - stash_bytes) / config.bucket_bytes();
        require(layout.total_buckets > 0, "memory_bytes too small for a single bucket");
    }

    if (config.lambda_cap) {
        layout.lambda_cap = *config.lambda_cap;
    } else {
        require(config.n_hint > 0, "lambda_cap or n_hint must be given");
        layout.lambda_cap = derive_lambda(layout.total_buckets, config.n_hint, config.r_w, config.r_lambda);
    }
    require(layout.lambda_cap > 0, "lambda_cap must be positive");

    for (unsigned i = 1; i <= config.depth; ++i) {
        const Count t = layer_threshold(layout.lambda_cap, config.r_lambda, i);
        if (t == 0) break;
        layout.thresholds.push_back(t);
    }
    require(!layout.thresholds.empty(), "lambda_cap too small: first layer threshold is 0");
    layout.effective_depth = static_cast<unsigned>(layout.thresholds.size());
    require(layout.thresholds.front() <= field_max(config.no_bits), "layer threshold exceeds the NO field width");

    std::size_t first_bucket_layer = 0;
    if (config.filter_enabled()) {
        require(layout.effective_depth >= 2, "mice filter needs at least two effective layers");
        layout.filter_cap = layout.thresholds.front();
        require(layout.filter_cap <= field_max(config.filter_bits), "first layer threshold exceeds filter counter width");
        layout.filter_width = filter_bytes / counter_bytes / 2;
        require(layout.filter_width > 0, "mice filter budget is smaller than one counter per array");
        first_bucket_layer = 1;
    }

    // Bucket layers always share the full budget W, whether or not the filter
    // stands in for logical layer 1.
    for (std::size_t t = first_bucket_layer; t < layout.thresholds.size(); ++t) {
        const auto k = static_cast<unsigned>(t - first_bucket_layer + 1);
        layout.bucket_layers.push_back({layer_width(layout.total_buckets, config.r_w, k), layout.thresholds[t]});
    }
    return layout;
}

}  // namespace rsketch
