#ifndef OPACITY_CORPUS_HPP
#define OPACITY_CORPUS_HPP

#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "opacity/errors.hpp"
#include "opacity/unicode.hpp"

namespace opacity {

enum class VocabKind { orthographic, phonemic };

// Reserved token indices, identical in every vocabulary.
inline constexpr int kPadId = 0;
inline constexpr int kBosId = 1;
inline constexpr int kEosId = 2;
inline constexpr int kMaskId = 3;
inline constexpr int kNumReserved = 4;

/// Bidirectional symbol <-> index map with the four reserved tokens at
/// fixed positions. Data symbols are stored sorted (UTF-8 byte order) so
/// that the same symbol set always yields the same vocabulary.
class Vocabulary {
public:
    Vocabulary() = default;

    /// Builds from data symbols (deduplicated and sorted internally).
    static Vocabulary build(VocabKind kind,
                            const std::vector<std::string>& data_symbols);

    /// Reconstructs from a full symbol list (reserved tokens first),
    /// preserving the given order. Used when deserializing, where entry
    /// indices refer to this exact ordering.
    static Vocabulary from_symbols(VocabKind kind,
                                   std::vector<std::string> full_symbols);

    VocabKind kind() const { return kind_; }
    int size() const { return static_cast<int>(symbols_.size()); }
    int data_size() const { return size() - kNumReserved; }
    const std::string& symbol(int id) const { return symbols_.at(id); }
    const std::vector<std::string>& symbols() const { return symbols_; }
    bool contains(const std::string& sym) const { return index_.count(sym); }
    /// Index of a symbol; throws Error when absent.
    int id_of(const std::string& sym) const;

    bool operator==(const Vocabulary& other) const {
        return kind_ == other.kind_ && symbols_ == other.symbols_;
    }

private:
    VocabKind kind_ = VocabKind::orthographic;
    std::vector<std::string> symbols_;
    std::unordered_map<std::string, int> index_;
};

/// A word as a sequence of vocabulary indices.
struct SymbolSeq {
    std::vector<int> ids;
    VocabKind kind = VocabKind::orthographic;

    std::size_t size() const { return ids.size(); }
    bool operator==(const SymbolSeq&) const = default;
};

/// Ordered list of (orthography, pronunciation) pairs with their two
/// vocabularies and provenance metadata.
struct PairedCorpus {
    std::string language;
    std::string breadth = "broad";  // "broad" | "narrow"
    Vocabulary vocab_orth;
    Vocabulary vocab_phon;
    std::vector<std::pair<SymbolSeq, SymbolSeq>> entries;
    std::vector<std::string> pipeline;  // decomposition stages applied
    bool truncated = false;  // select_top_n found fewer forms than requested

    std::size_t size() const { return entries.size(); }

    /// Orthography of entry i decoded back to a UTF-8 string.
    std::string orth_text(std::size_t i) const;
    /// Pronunciation of entry i as IPA segment strings.
    std::vector<std::string> phon_segments(std::size_t i) const;

    std::string to_json() const;
    static PairedCorpus from_json_text(std::string_view json_text);
    void save(const std::string& path) const;
    static PairedCorpus load(const std::string& path);

    /// FNV-1a digest of the serialized corpus; recorded in results.
    std::string digest() const;

    bool operator==(const PairedCorpus&) const = default;
};

/// One raw lexicon line: word plus pre-segmented IPA pronunciation.
struct LexiconRecord {
    std::string word;
    std::vector<std::string> pron;
    bool operator==(const LexiconRecord&) const = default;
};

/// Parses `word<TAB>seg1 seg2 ...` lines. Comment lines starting with '#'
/// and blank lines are skipped. Duplicate words are all kept here; the
/// dedup rule lives in select_top_n.
std::vector<LexiconRecord> parse_pron_lexicon(std::string_view text);

/// word -> occurrence count.
using FrequencyTable = std::unordered_map<std::string, std::uint64_t>;

/// Parses `word<TAB>count` lines; duplicate words sum their counts.
FrequencyTable parse_frequency_list(std::string_view text);

/// Keeps the first pronunciation per orthographic form, ranks forms by
/// descending count (missing words count 0, ties broken by ascending
/// byte order of the word) and retains the top n. Vocabularies are built
/// from the retained subset only. Sets `truncated` when fewer than n
/// forms exist.
PairedCorpus select_top_n(const std::vector<LexiconRecord>& lexicon,
                          const FrequencyTable& freqs, std::size_t n,
                          std::string language = "",
                          std::string breadth = "broad");

using ScriptPredicate = std::function<bool(CodePoint)>;

/// Entries whose orthography consists entirely of symbols satisfying the
/// predicate; order preserved, vocabularies rebuilt. Throws when the
/// result is empty, naming `predicate_name`.
PairedCorpus filter_by_script(const PairedCorpus& corpus,
                              const ScriptPredicate& predicate,
                              std::string_view predicate_name);

/// Named Unicode-block classes: "hiragana", "katakana", "han", "other"
/// (none of the former three), "any".
ScriptPredicate script_class(std::string_view name);

}  // namespace opacity

#endif
