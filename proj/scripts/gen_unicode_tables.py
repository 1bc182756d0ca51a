#!/usr/bin/env python3
"""Regenerates core/src/unicode_data.cpp from the Unicode Character Database
shipped with the running Python interpreter (unicodedata module).

Emits:
  - fully expanded canonical decomposition mappings (Hangul syllables
    excluded; those are decomposed arithmetically elsewhere),
  - canonical combining classes as ranges,
  - Hangul compatibility-jamo tables (initial/medial/final).

Usage: python3 scripts/gen_unicode_tables.py > core/src/unicode_data.cpp
"""

import sys
import unicodedata


def canonical_decomposition(cp):
    """Fully expanded canonical (not compatibility) decomposition, or None."""
    ch = chr(cp)
    if 0xAC00 <= cp <= 0xD7A3:  # Hangul handled arithmetically
        return None
    d = unicodedata.decomposition(ch)
    if not d or d.startswith("<"):
        return None
    out = []
    for hexcp in d.split():
        sub = int(hexcp, 16)
        rec = canonical_decomposition(sub)
        out.extend(rec if rec else [sub])
    return out


def main():
    decomp = {}
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            continue
        d = canonical_decomposition(cp)
        if d:
            decomp[cp] = d

    # ccc ranges
    ccc_runs = []
    run = None
    for cp in range(0x110000):
        if 0xD800 <= cp <= 0xDFFF:
            c = 0
        else:
            c = unicodedata.combining(chr(cp))
        if c:
            if run and run[1] == cp - 1 and run[2] == c:
                run = (run[0], cp, c)
            else:
                if run:
                    ccc_runs.append(run)
                run = (cp, cp, c)
        else:
            if run:
                ccc_runs.append(run)
                run = None
    if run:
        ccc_runs.append(run)

    # conjoining jamo -> compatibility jamo, matched by letter name:
    # "HANGUL CHOSEONG/JUNGSEONG/JONGSEONG X" -> "HANGUL LETTER X"
    def compat_of(cp):
        part = unicodedata.name(chr(cp)).split(None, 2)[2]
        return ord(unicodedata.lookup("HANGUL LETTER " + part))

    cho = [compat_of(0x1100 + i) for i in range(19)]
    jung = [compat_of(0x1161 + i) for i in range(21)]
    jong = [compat_of(0x11A8 + i) for i in range(27)]

    pool = []
    index_rows = []
    for cp in sorted(decomp):
        seq = decomp[cp]
        index_rows.append((cp, len(pool), len(seq)))
        pool.extend(seq)

    w = sys.stdout.write
    w("// Generated by scripts/gen_unicode_tables.py -- do not edit.\n")
    w("// Unicode Character Database version %s.\n\n" % unicodedata.unidata_version)
    w('#include "unicode_data.hpp"\n\n')
    w("namespace opacity::detail {\n\n")

    w("const DecompEntry kDecompIndex[] = {\n")
    for cp, off, n in index_rows:
        w("    {0x%X, %d, %d},\n" % (cp, off, n))
    w("};\n")
    w("const std::size_t kDecompIndexSize = sizeof(kDecompIndex) / sizeof(kDecompIndex[0]);\n\n")

    w("const char32_t kDecompPool[] = {\n")
    for i in range(0, len(pool), 12):
        w("    " + ", ".join("0x%X" % c for c in pool[i : i + 12]) + ",\n")
    w("};\n\n")

    w("const CccRange kCccRanges[] = {\n")
    for lo, hi, c in ccc_runs:
        w("    {0x%X, 0x%X, %d},\n" % (lo, hi, c))
    w("};\n")
    w("const std::size_t kCccRangesSize = sizeof(kCccRanges) / sizeof(kCccRanges[0]);\n\n")

    def jamo_table(name, vals):
        w("const char32_t %s[] = {\n    " % name)
        w(", ".join("0x%X" % v for v in vals))
        w("\n};\n\n")

    jamo_table("kCompatChoseong", cho)
    jamo_table("kCompatJungseong", jung)
    jamo_table("kCompatJongseong", jong)

    w("}  // namespace opacity::detail\n")


if __name__ == "__main__":
    main()
