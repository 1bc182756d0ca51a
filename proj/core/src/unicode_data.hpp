// Internal tables backing NFD normalization and jamo decomposition.
// The .cpp is generated; see scripts/gen_unicode_tables.py.
#ifndef OPACITY_UNICODE_DATA_HPP
#define OPACITY_UNICODE_DATA_HPP

#include <cstddef>

namespace opacity::detail {

struct DecompEntry {
    char32_t cp;
    unsigned offset;  // into kDecompPool
    unsigned length;
};

struct CccRange {
    char32_t lo;
    char32_t hi;
    unsigned char ccc;
};

extern const DecompEntry kDecompIndex[];
extern const std::size_t kDecompIndexSize;
extern const char32_t kDecompPool[];
extern const CccRange kCccRanges[];
extern const std::size_t kCccRangesSize;

// Compatibility jamo for the 19 initials, 21 medials, 27 non-empty finals.
extern const char32_t kCompatChoseong[];
extern const char32_t kCompatJungseong[];
extern const char32_t kCompatJongseong[];

}  // namespace opacity::detail

#endif
