#pragma once

#include <cstdint>
#include <string>
#include <string_view>

namespace nomina {

/// FNV-1a 64-bit hash of a byte string.
inline std::uint64_t fnv1a64(std::string_view bytes) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char b : bytes) {
        h ^= b;
        h *= 1099511628211ull;
    }
    return h;
}

/// Hash rendered as 16 lowercase hex digits.
std::string fnv1a64_hex(std::string_view bytes);

}  // namespace nomina
