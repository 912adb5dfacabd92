#include "rsketch/analytics.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

namespace rsketch {
namespace {

void require_untainted(std::span<const KeyInterval> intervals) {
    for (const auto& ki : intervals) {
        if (ki.interval.overflow_tainted) throw std::invalid_argument("tainted interval: guarantees do not hold");
    }
}

void require_untainted(const ReliableSketch& sketch) {
    if (sketch.overflowed()) throw std::invalid_argument("sketch overflowed: guarantees do not hold");
}

// k-th largest value of `field` over the intervals.
template <typename Field>
Count kth_largest(std::span<const KeyInterval> intervals, std::size_t k, Field field) {
    if (k == 0 || k > intervals.size()) throw std::invalid_argument("k must lie in [1, number of candidates]");
    std::vector<Count> values;
    values.reserve(intervals.size());
    for (const auto& ki : intervals) values.push_back(field(ki.interval));
    std::nth_element(values.begin(), values.begin() + static_cast<std::ptrdiff_t>(k - 1), values.end(),
                     std::greater<>());
    return values[k - 1];
}

}  // namespace

EvalReport evaluate(const Truth& truth, const PointEstimator& estimate, Count lambda_cap) {
    if (truth.empty()) throw std::invalid_argument("evaluate needs a non-empty truth map");
    EvalReport report;
    long double abs_sum = 0.0L;
    long double rel_sum = 0.0L;
    for (const auto& [key, value] : truth) {
        const Count est = estimate(key);
        const Count err = est > value ? est - value : value - est;
        if (err > lambda_cap) ++report.outliers;
        report.max_abs_error = std::max(report.max_abs_error, err);
        abs_sum += static_cast<long double>(err);
        if (value > 0) rel_sum += static_cast<long double>(err) / static_cast<long double>(value);
    }
    report.distinct_keys = truth.size();
    report.aae = static_cast<double>(abs_sum / static_cast<long double>(truth.size()));
    report.are = static_cast<double>(rel_sum / static_cast<long double>(truth.size()));
    return report;
}

std::vector<KeyInterval> intervals_for(const ReliableSketch& sketch, std::span<const Key> candidates) {
    std::vector<KeyInterval> out;
    out.reserve(candidates.size());
    for (Key key : candidates) out.push_back({key, sketch.query(key)});
    return out;
}

std::vector<Key> topk_no_miss(std::span<const KeyInterval> intervals, std::size_t k) {
    require_untainted(intervals);
    const Count cut = kth_largest(intervals, k, [](const EstimateInterval& iv) { return iv.lower; });
    std::vector<Key> out;
    for (const auto& ki : intervals) {
        if (ki.interval.upper >= cut) out.push_back(ki.key);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Key> topk_no_false(std::span<const KeyInterval> intervals, std::size_t k) {
    require_untainted(intervals);
    const Count cut = kth_largest(intervals, k, [](const EstimateInterval& iv) { return iv.upper; });
    std::vector<Key> out;
    for (const auto& ki : intervals) {
        if (ki.interval.lower >= cut) out.push_back(ki.key);
    }
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<Key> topk_no_miss(const ReliableSketch& sketch, std::size_t k) {
    require_untainted(sketch);
    const auto keys = sketch.recorded_keys();
    return topk_no_miss(intervals_for(sketch, keys), k);
}

std::vector<Key> topk_no_miss(const ReliableSketch& sketch, std::size_t k, std::span<const Key> candidates) {
    require_untainted(sketch);
    return topk_no_miss(intervals_for(sketch, candidates), k);
}

std::vector<Key> topk_no_false(const ReliableSketch& sketch, std::size_t k) {
    require_untainted(sketch);
    const auto keys = sketch.recorded_keys();
    return topk_no_false(intervals_for(sketch, keys), k);
}

std::vector<Key> topk_no_false(const ReliableSketch& sketch, std::size_t k, std::span<const Key> candidates) {
    require_untainted(sketch);
    return topk_no_false(intervals_for(sketch, candidates), k);
}

Count max_possible_change(const EstimateInterval& a, const EstimateInterval& b) {
    const Count up = b.upper > a.lower ? b.upper - a.lower : 0;
    const Count down = a.upper > b.lower ? a.upper - b.lower : 0;
    return std::max(up, down);
}

std::vector<Key> heavy_changes(const ReliableSketch& a, const ReliableSketch& b, Count threshold,
                               std::span<const Key> candidates) {
    require_untainted(a);
    require_untainted(b);
    if (threshold < a.lambda_cap() + b.lambda_cap()) {
        throw std::invalid_argument("heavy change threshold must be at least the sum of both error thresholds");
    }
    std::vector<Key> out;
    for (Key key : candidates) {
        if (max_possible_change(a.query(key), b.query(key)) >= threshold) out.push_back(key);
    }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

std::vector<Key> heavy_changes(const ReliableSketch& a, const ReliableSketch& b, Count threshold) {
    auto keys = a.recorded_keys();
    const auto more = b.recorded_keys();
    keys.insert(keys.end(), more.begin(), more.end());
    return heavy_changes(a, b, threshold, keys);
}

std::string format_report_row(const ReportRow& row) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%s,%llu,%llu,%llu,%llu,%.6f,%.6f,%.3f,%.4f", row.algo.c_str(),
                  static_cast<unsigned long long>(row.memory_bytes), static_cast<unsigned long long>(row.lambda),
                  static_cast<unsigned long long>(row.seed), static_cast<unsigned long long>(row.report.outliers),
                  row.report.aae, row.report.are, row.report.insert_mops, row.report.avg_layers);
    return buf;
}

}  // namespace rsketch
