#ifndef OPACITY_UNICODE_HPP
#define OPACITY_UNICODE_HPP

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace opacity {

using CodePoint = char32_t;

/// Decodes UTF-8 into code points. Throws ParseError on invalid sequences
/// (overlong encodings, surrogates, truncation).
std::vector<CodePoint> utf8_decode(std::string_view s);

/// Encodes code points back to UTF-8.
std::string utf8_encode(const std::vector<CodePoint>& cps);
std::string utf8_encode(CodePoint cp);

// Unicode block predicates used by script filtering and decomposition.
inline bool is_hangul_syllable(CodePoint cp) {
    return cp >= 0xAC00 && cp <= 0xD7A3;
}
inline bool is_hiragana(CodePoint cp) {
    return cp >= 0x3040 && cp <= 0x309F;
}
inline bool is_katakana(CodePoint cp) {
    return (cp >= 0x30A0 && cp <= 0x30FF) || (cp >= 0x31F0 && cp <= 0x31FF);
}
inline bool is_han(CodePoint cp) {
    return (cp >= 0x4E00 && cp <= 0x9FFF) ||    // CJK Unified
           (cp >= 0x3400 && cp <= 0x4DBF) ||    // Extension A
           (cp >= 0xF900 && cp <= 0xFAFF) ||    // Compatibility Ideographs
           (cp >= 0x20000 && cp <= 0x2FA1F);    // Extensions B..F + compat sup
}
/// Ideographic Description Characters; kept as real symbols by the
/// decomposition pipeline because they encode component layout.
inline bool is_idc(CodePoint cp) { return cp >= 0x2FF0 && cp <= 0x2FFB; }

/// Canonical combining class (0 for starters).
int combining_class(CodePoint cp);

}  // namespace opacity

#endif
