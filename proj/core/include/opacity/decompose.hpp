#ifndef OPACITY_DECOMPOSE_HPP
#define OPACITY_DECOMPOSE_HPP

#include <string>
#include <string_view>
#include <unordered_map>

#include "opacity/corpus.hpp"

namespace opacity {

/// Unicode canonical decomposition (NFD) with one deliberate exception:
/// precomposed Hangul syllables are left alone so that decompose_hangul
/// remains the single authority for jamo output. Idempotent.
std::string nfd_normalize(std::string_view s);

/// Replaces each precomposed syllable U+AC00..U+D7A3 with its 2-3
/// compatibility jamo, computed arithmetically (initial = i/588,
/// medial = (i%588)/28, final = i%28 with 0 meaning none). Everything
/// else passes through.
std::string decompose_hangul(std::string_view s);

/// Han-character component table loaded from a JSON-lines database.
class HanziTable {
public:
    /// Parses lines of {"character": "...", "decomposition": "..."}.
    /// Entries with an empty or placeholder decomposition are atomic.
    /// Rejects tables whose decomposition graph contains a cycle, so
    /// recursive expansion always terminates.
    static HanziTable load(std::string_view jsonl);

    bool has(CodePoint cp) const { return map_.count(cp) != 0; }
    const std::u32string* lookup(CodePoint cp) const;
    std::size_t size() const { return map_.size(); }

private:
    std::unordered_map<char32_t, std::u32string> map_;
};

enum class HanziDepth { one_level, recursive };

/// Replaces every character present in the table with its decomposition,
/// either once or until all components are atomic. Characters absent
/// from the table pass through; IDC layout marks are kept as symbols.
std::string decompose_hanzi(std::string_view s, const HanziTable& table,
                            HanziDepth depth);

struct DecomposeConfig {
    bool hangul = false;
    bool hanzi = false;
    bool nfd = false;
    HanziDepth hanzi_depth = HanziDepth::one_level;
};

/// Rewrites every orthographic string in fixed order (hangul -> hanzi ->
/// nfd), rebuilds the orthographic vocabulary, and records the applied
/// stages in the corpus metadata. `table` may be null when hanzi is off.
PairedCorpus apply_decomposition_pipeline(const PairedCorpus& corpus,
                                          const DecomposeConfig& config,
                                          const HanziTable* table = nullptr);

}  // namespace opacity

#endif
