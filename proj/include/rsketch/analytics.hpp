#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "rsketch/datasets.hpp"
#include "rsketch/reliable_sketch.hpp"
#include "rsketch/types.hpp"

namespace rsketch {

struct EvalReport {
    std::uint64_t outliers = 0;  // keys with |estimate - truth| > lambda
    double aae = 0.0;            // mean absolute error over distinct keys
    double are = 0.0;            // mean relative error over distinct keys
    double insert_mops = 0.0;    // filled in by the caller that timed the inserts
    double avg_layers = 0.0;     // filled in by the caller
    std::uint64_t distinct_keys = 0;
    Count max_abs_error = 0;
};

using PointEstimator = std::function<Count(Key)>;

/// Accuracy of `estimate` against exact counts. Throws std::invalid_argument
/// on an empty truth map.
EvalReport evaluate(const Truth& truth, const PointEstimator& estimate, Count lambda_cap);

struct KeyInterval {
    Key key = 0;
    EstimateInterval interval;
};

/// Queries every candidate key.
std::vector<KeyInterval> intervals_for(const ReliableSketch& sketch, std::span<const Key> candidates);

/// Report that misses no top-k key: with L the k-th largest lower bound,
/// every key whose upper bound is >= L. Keys are returned in ascending order.
/// Throws std::invalid_argument if k == 0, k exceeds the candidates, or any
/// interval is tainted.
std::vector<Key> topk_no_miss(std::span<const KeyInterval> intervals, std::size_t k);

/// Report without false top-k members: with U the k-th largest upper bound,
/// every key whose lower bound is >= U. May hold fewer than k keys.
std::vector<Key> topk_no_false(std::span<const KeyInterval> intervals, std::size_t k);

/// Sketch-level variants scanning the keys recorded in buckets and stash
/// (requires 64-bit ids) or an explicit candidate set.
std::vector<Key> topk_no_miss(const ReliableSketch& sketch, std::size_t k);
std::vector<Key> topk_no_miss(const ReliableSketch& sketch, std::size_t k, std::span<const Key> candidates);
std::vector<Key> topk_no_false(const ReliableSketch& sketch, std::size_t k);
std::vector<Key> topk_no_false(const ReliableSketch& sketch, std::size_t k, std::span<const Key> candidates);

/// Largest change between the two sketches that the intervals allow.
Count max_possible_change(const EstimateInterval& a, const EstimateInterval& b);

/// Keys whose value may have changed by at least `threshold` between the two
/// sketches. Every key whose true change is >= threshold is reported, and a
/// reported key's true change is at least threshold - (lambda_a + lambda_b).
/// Requires threshold >= lambda_a + lambda_b and untainted sketches; throws
/// std::invalid_argument otherwise.
std::vector<Key> heavy_changes(const ReliableSketch& a, const ReliableSketch& b, Count threshold,
                               std::span<const Key> candidates);
/// Scans the union of keys recorded by either sketch (64-bit ids).
std::vector<Key> heavy_changes(const ReliableSketch& a, const ReliableSketch& b, Count threshold);

/// Report CSV columns, in order.
inline constexpr const char* kReportHeader = "algo,memory_bytes,lambda,seed,outliers,aae,are,mops,avg_layers";

struct ReportRow {
    std::string algo;
    std::uint64_t memory_bytes = 0;
    Count lambda = 0;
    std::uint64_t seed = 0;
    EvalReport report;
};

std::string format_report_row(const ReportRow& row);

}  // namespace rsketch
