#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace pairnet {

/// Violation of an input contract (bad dimensions, missing class, invalid
/// config, malformed file). The CLI maps these to exit code 2.
class StructuralError : public std::runtime_error {
public:
    explicit StructuralError(const std::string& what) : std::runtime_error(what) {}
};

/// Formats a double as decimal text that parses back to the identical bits
/// (17 significant digits). Used everywhere a number is serialized.
std::string format_double(double v);

/// Parses decimal text into a double; throws StructuralError on garbage.
double parse_double(const std::string& s);

/// Parses a non-negative integer; throws StructuralError on garbage.
long long parse_int(const std::string& s);

/// FNV-1a 64-bit over a byte buffer, used for manifest artifact checksums.
std::uint64_t fnv1a64(const void* data, std::size_t len);

} // namespace pairnet
