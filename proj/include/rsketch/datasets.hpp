#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "rsketch/types.hpp"

namespace rsketch {

/// One stream item.
struct TraceRecord {
    Key key = 0;
    Count value = 1;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

using Trace = std::vector<TraceRecord>;
using Truth = std::unordered_map<Key, Count>;

/// Draws ranks with P(r) proportional to r^-skew over 1..n_keys and maps each
/// rank to a distinct pseudo-random 64-bit key. Output depends only on the
/// constructor arguments.
class ZipfGenerator {
public:
    ZipfGenerator(std::uint64_t n_keys, double skew, std::uint64_t seed);

    /// Rank in [1, n_keys].
    std::uint64_t next_rank();
    Key next() { return key_of_rank(next_rank()); }
    Key key_of_rank(std::uint64_t rank) const;

    /// Normalized probability of `rank`.
    double probability(std::uint64_t rank) const;

private:
    std::vector<double> cdf_;  // cdf_[r-1] = P(rank <= r)
    std::uint64_t key_salt_;
    std::mt19937_64 engine_;
};

/// n_items unit-value records drawn from ZipfGenerator(n_keys, skew, seed).
Trace gen_zipf(std::uint64_t n_items, std::uint64_t n_keys, double skew, std::uint64_t seed);

enum class TraceFormat { text, binary };

/// ".bin" selects binary, anything else text.
TraceFormat format_for_path(const std::filesystem::path& path);

/// Error while reading a trace; carries the 1-based line (text) or the byte
/// offset (binary) where parsing stopped.
class TraceParseError : public std::runtime_error {
public:
    TraceParseError(const std::string& what, std::uint64_t position)
        : std::runtime_error(what), position_(position) {}
    std::uint64_t position() const { return position_; }

private:
    std::uint64_t position_;
};

/// Streams records from a trace file without buffering the whole file.
/// Text: one record per line, "key" or "key,value" in decimal; blank lines
/// are skipped. Binary: repeated little-endian (u64 key, u64 value).
class TraceReader {
public:
    TraceReader(const std::filesystem::path& path, TraceFormat format);

    /// Next record, or std::nullopt at end of input. Throws TraceParseError.
    std::optional<TraceRecord> next();

private:
    std::ifstream in_;
    TraceFormat format_;
    std::uint64_t line_ = 0;
    std::uint64_t offset_ = 0;
};

class TraceWriter {
public:
    TraceWriter(const std::filesystem::path& path, TraceFormat format);
    void write(const TraceRecord& record);
    void close();

private:
    std::ofstream out_;
    TraceFormat format_;
};

Trace load_trace(const std::filesystem::path& path, TraceFormat format);
void save_trace(const std::filesystem::path& path, std::span<const TraceRecord> trace, TraceFormat format);

/// Parses one text line; `line_no` is used in error messages.
TraceRecord parse_trace_line(std::string_view line, std::uint64_t line_no);

/// Exact per-key value sums.
Truth exact_oracle(std::span<const TraceRecord> trace);

}  // namespace rsketch
