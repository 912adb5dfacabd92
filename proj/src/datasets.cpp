#include "rsketch/datasets.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>

#include "rsketch/hash.hpp"

namespace rsketch {
namespace {

// 53 random bits mapped to [0, 1); identical on every platform, unlike
// std::uniform_real_distribution.
double unit_double(std::mt19937_64& engine) {
    return static_cast<double>(engine() >> 11) * 0x1.0p-53;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r");
    if (first == std::string_view::npos) return {};
    const auto last = s.find_last_not_of(" \t\r");
    return s.substr(first, last - first + 1);
}

bool parse_u64(std::string_view s, std::uint64_t& out) {
    s = trim(s);
    if (s.empty()) return false;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
    return ec == std::errc{} && ptr == s.data() + s.size();
}

}  // namespace

ZipfGenerator::ZipfGenerator(std::uint64_t n_keys, double skew, std::uint64_t seed)
    : key_salt_(mix64(seed ^ 0x5a1f5a1f5a1f5a1fULL)), engine_(seed) {
    if (n_keys == 0) throw ConfigError("zipf generator needs at least one key");
    if (!(skew >= 0.0)) throw ConfigError("zipf skew must be >= 0");
    cdf_.resize(n_keys);
    double sum = 0.0;
    for (std::uint64_t r = 1; r <= n_keys; ++r) {
        sum += std::pow(static_cast<double>(r), -skew);
        cdf_[r - 1] = sum;
    }
    for (double& c : cdf_) c /= sum;
    cdf_.back() = 1.0;
}

std::uint64_t ZipfGenerator::next_rank() {
    const double u = unit_double(engine_);
    const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
    const auto idx = static_cast<std::uint64_t>(std::min<std::ptrdiff_t>(it - cdf_.begin(), cdf_.size() - 1));
    return idx + 1;
}

Key ZipfGenerator::key_of_rank(std::uint64_t rank) const {
    // mix64 is a bijection, so distinct ranks give distinct keys.
    return mix64(rank ^ key_salt_);
}

double ZipfGenerator::probability(std::uint64_t rank) const {
    if (rank == 0 || rank > cdf_.size()) return 0.0;
    return rank == 1 ? cdf_[0] : cdf_[rank - 1] - cdf_[rank - 2];
}

Trace gen_zipf(std::uint64_t n_items, std::uint64_t n_keys, double skew, std::uint64_t seed) {
    ZipfGenerator gen(n_keys, skew, seed);
    Trace trace;
    trace.reserve(n_items);
    for (std::uint64_t i = 0; i < n_items; ++i) trace.push_back({gen.next(), 1});
    return trace;
}

TraceFormat format_for_path(const std::filesystem::path& path) {
    return path.extension() == ".bin" ? TraceFormat::binary : TraceFormat::text;
}

TraceRecord parse_trace_line(std::string_view line, std::uint64_t line_no) {
    const auto fail = [&](const std::string& why) -> TraceParseError {
        return TraceParseError("line " + std::to_string(line_no) + ": " + why, line_no);
    };
    TraceRecord rec;
    const auto comma = line.find(',');
    if (!parse_u64(line.substr(0, comma), rec.key)) throw fail("invalid key");
    if (comma != std::string_view::npos) {
        if (!parse_u64(line.substr(comma + 1), rec.value)) throw fail("invalid value");
        if (rec.value == 0) throw fail("value must be >= 1");
    }
    return rec;
}

TraceReader::TraceReader(const std::filesystem::path& path, TraceFormat format)
    : in_(path, format == TraceFormat::binary ? std::ios::binary : std::ios::in), format_(format) {
    if (!in_) throw std::runtime_error("cannot open trace " + path.string());
}

std::optional<TraceRecord> TraceReader::next() {
    if (format_ == TraceFormat::binary) {
        unsigned char buf[16];
        in_.read(reinterpret_cast<char*>(buf), sizeof buf);
        const auto got = static_cast<std::uint64_t>(in_.gcount());
        if (got == 0) return std::nullopt;
        if (got != sizeof buf) throw TraceParseError("truncated record at offset " + std::to_string(offset_), offset_);
        TraceRecord rec{0, 0};
        for (int i = 0; i < 8; ++i) {
            rec.key |= std::uint64_t{buf[i]} << (8 * i);
            rec.value |= std::uint64_t{buf[8 + i]} << (8 * i);
        }
        if (rec.value == 0) {
            throw TraceParseError("zero value at offset " + std::to_string(offset_), offset_);
        }
        offset_ += sizeof buf;
        return rec;
    }

    std::string line;
    while (std::getline(in_, line)) {
        ++line_;
        if (trim(line).empty()) continue;
        return parse_trace_line(line, line_);
    }
    return std::nullopt;
}

TraceWriter::TraceWriter(const std::filesystem::path& path, TraceFormat format)
    : out_(path, std::ios::trunc | (format == TraceFormat::binary ? std::ios::binary : std::ios::out)),
      format_(format) {
    if (!out_) throw std::runtime_error("cannot write trace " + path.string());
}

void TraceWriter::write(const TraceRecord& record) {
    if (format_ == TraceFormat::binary) {
        char buf[16];
        for (int i = 0; i < 8; ++i) {
            buf[i] = static_cast<char>(record.key >> (8 * i));
            buf[8 + i] = static_cast<char>(record.value >> (8 * i));
        }
        out_.write(buf, sizeof buf);
    } else if (record.value == 1) {
        out_ << record.key << '\n';
    } else {
        out_ << record.key << ',' << record.value << '\n';
    }
}

void TraceWriter::close() {
    out_.close();
    if (!out_) throw std::runtime_error("failed to finish writing trace");
}

Trace load_trace(const std::filesystem::path& path, TraceFormat format) {
    TraceReader reader(path, format);
    Trace trace;
    while (auto rec = reader.next()) trace.push_back(*rec);
    return trace;
}

void save_trace(const std::filesystem::path& path, std::span<const TraceRecord> trace, TraceFormat format) {
    TraceWriter writer(path, format);
    for (const auto& rec : trace) writer.write(rec);
    writer.close();
}

Truth exact_oracle(std::span<const TraceRecord> trace) {
    Truth truth;
    for (const auto& rec : trace) truth[rec.key] += rec.value;
    return truth;
}

}  // namespace rsketch
