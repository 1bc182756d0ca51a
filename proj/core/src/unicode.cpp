#include "opacity/unicode.hpp"

#include "opacity/errors.hpp"

namespace opacity {

std::vector<CodePoint> utf8_decode(std::string_view s) {
    std::vector<CodePoint> out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        unsigned char b0 = static_cast<unsigned char>(s[i]);
        CodePoint cp = 0;
        std::size_t len = 0;
        if (b0 < 0x80) {
            cp = b0;
            len = 1;
        } else if ((b0 & 0xE0) == 0xC0) {
            cp = b0 & 0x1F;
            len = 2;
        } else if ((b0 & 0xF0) == 0xE0) {
            cp = b0 & 0x0F;
            len = 3;
        } else if ((b0 & 0xF8) == 0xF0) {
            cp = b0 & 0x07;
            len = 4;
        } else {
            throw ParseError("invalid UTF-8 lead byte at offset " +
                             std::to_string(i));
        }
        if (i + len > s.size())
            throw ParseError("truncated UTF-8 sequence at offset " +
                             std::to_string(i));
        for (std::size_t k = 1; k < len; ++k) {
            unsigned char b = static_cast<unsigned char>(s[i + k]);
            if ((b & 0xC0) != 0x80)
                throw ParseError("invalid UTF-8 continuation at offset " +
                                 std::to_string(i + k));
            cp = (cp << 6) | (b & 0x3F);
        }
        // Reject overlong forms and surrogates.
        static constexpr CodePoint kMin[5] = {0, 0, 0x80, 0x800, 0x10000};
        if (len > 1 && cp < kMin[len])
            throw ParseError("overlong UTF-8 encoding at offset " +
                             std::to_string(i));
        if (cp >= 0xD800 && cp <= 0xDFFF)
            throw ParseError("UTF-8 encoded surrogate at offset " +
                             std::to_string(i));
        if (cp > 0x10FFFF)
            throw ParseError("code point out of range at offset " +
                             std::to_string(i));
        out.push_back(cp);
        i += len;
    }
    return out;
}

std::string utf8_encode(CodePoint cp) {
    std::string out;
    if (cp < 0x80) {
        out += static_cast<char>(cp);
    } else if (cp < 0x800) {
        out += static_cast<char>(0xC0 | (cp >> 6));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else if (cp < 0x10000) {
        out += static_cast<char>(0xE0 | (cp >> 12));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    } else {
        out += static_cast<char>(0xF0 | (cp >> 18));
        out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
        out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
        out += static_cast<char>(0x80 | (cp & 0x3F));
    }
    return out;
}

std::string utf8_encode(const std::vector<CodePoint>& cps) {
    std::string out;
    out.reserve(cps.size() * 2);
    for (CodePoint cp : cps) out += utf8_encode(cp);
    return out;
}

}  // namespace opacity
