#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace rsketch {

using Key = std::uint64_t;
using Count = std::uint64_t;

/// Invalid or inconsistent parameters, including counter-width saturation.
class ConfigError : public std::invalid_argument {
public:
    explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A counter would exceed its configured field width.
class CounterOverflow : public ConfigError {
public:
    explicit CounterOverflow(const std::string& what) : ConfigError(what) {}
};

/// Malformed serialized data (bad magic, version, truncation, mismatch).
class FormatError : public std::runtime_error {
public:
    explicit FormatError(const std::string& what) : std::runtime_error(what) {}
};

/// Largest value representable in an unsigned field of `bits` width.
constexpr Count field_max(unsigned bits) {
    return bits >= 64 ? ~Count{0} : (Count{1} << bits) - 1;
}

}  // namespace rsketch
