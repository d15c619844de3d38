#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "nomina/error.hpp"

namespace nomina::detail {

/// Decodes UTF-8 into codepoints. Throws UnmappableCharacter on malformed
/// sequences, reporting the byte offset.
inline std::vector<char32_t> utf8_decode(std::string_view text) {
    std::vector<char32_t> out;
    out.reserve(text.size());
    std::size_t i = 0;
    while (i < text.size()) {
        const auto b0 = static_cast<unsigned char>(text[i]);
        char32_t cp = 0;
        std::size_t extra = 0;
        if (b0 < 0x80) {
            cp = b0;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            extra = 1;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            extra = 2;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            extra = 3;
        } else {
            throw UnmappableCharacter("invalid UTF-8 byte at offset " + std::to_string(i));
        }
        if (i + extra >= text.size() + (extra == 0 ? 1 : 0))
            throw UnmappableCharacter("truncated UTF-8 sequence at offset " + std::to_string(i));
        for (std::size_t k = 1; k <= extra; ++k) {
            const auto bk = static_cast<unsigned char>(text[i + k]);
            if ((bk & 0xC0) != 0x80)
                throw UnmappableCharacter("invalid UTF-8 continuation at offset " +
                                          std::to_string(i + k));
            cp = (cp << 6) | (bk & 0x3F);
        }
        out.push_back(cp);
        i += extra + 1;
    }
    return out;
}

inline void utf8_append(std::string& out, char32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

inline std::string utf8_encode(char32_t cp) {
    std::string out;
    utf8_append(out, cp);
    return out;
}

}  // namespace nomina::detail
