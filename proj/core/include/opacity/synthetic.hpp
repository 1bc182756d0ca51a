#ifndef OPACITY_SYNTHETIC_HPP
#define OPACITY_SYNTHETIC_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "opacity/corpus.hpp"

namespace opacity {

/// One grapheme-phoneme correspondence rule: a phoneme n-gram (n <= 3)
/// spelled as a fixed grapheme string.
struct GpcRule {
    std::vector<std::string> phonemes;
    std::vector<std::string> graphemes;
    bool operator==(const GpcRule&) const = default;
};

/// Ordered rule list applied longest-match-first with list order as the
/// tiebreak. Total: every phoneme is covered by a length-1 rule.
struct RuleTable {
    std::vector<GpcRule> rules;

    static RuleTable identity(const std::vector<std::string>& alphabet);

    /// Throws unless every alphabet phoneme has a length-1 rule.
    void validate(const std::vector<std::string>& alphabet) const;

    /// Deterministic spelling of a phoneme sequence.
    std::vector<std::string> spell(
        const std::vector<std::string>& phonemes) const;

    /// Distinct grapheme symbols appearing in rule outputs, sorted.
    std::vector<std::string> grapheme_inventory() const;

    int max_ngram() const;
    std::size_t size() const { return rules.size(); }
};

struct SynthConfig {
    int alphabet_size = 8;
    double mean_length = 5.0;  // geometric word-length distribution
    int min_length = 1;
    int max_length = 12;       // lengths truncated here
    int corpus_size = 2000;    // N
    double exception_rate = 0.0;  // epsilon
    std::uint64_t seed = 0;

    void validate() const;
    /// Exact mean of the truncated geometric length distribution.
    double expected_word_length() const;
    /// Exact entropy (bits) of the length distribution.
    double length_entropy_bits() const;
    std::string to_json() const;
    static SynthConfig from_json_text(std::string_view text);
};

/// Fixed pools of single-code-point symbols. Phonemes are lowercase
/// letters (then digits), graphemes uppercase (then Greek).
std::vector<std::string> phoneme_alphabet(int size);
std::vector<std::string> grapheme_alphabet(int size);

/// N distinct words: lengths from the truncated geometric distribution,
/// symbols uniform, duplicates resampled. Throws when the alphabet
/// cannot produce N unique words under the length cap.
std::vector<std::vector<std::string>> gen_phonology(const SynthConfig& config);

/// Level-1 tables are bijective single-symbol rules; each higher level
/// adds |alphabet| context rules (phoneme bigrams, and trigrams from
/// level 4 up) whose spellings are random grapheme strings of length
/// 2-3. Rule count is monotone in level; the table stays total and
/// deterministic.
RuleTable gen_rule_table(int level, const std::vector<std::string>& alphabet,
                         std::uint64_t seed);

/// Spells each word with the rule table; with probability
/// `exception_rate` a word instead receives a fixed random spelling of
/// the same length (a memorized exception). Exception word indices are
/// reported through `exception_indices` when non-null.
PairedCorpus gen_orthography(
    const std::vector<std::vector<std::string>>& phon_words,
    const RuleTable& rules, double exception_rate, std::uint64_t seed,
    std::vector<std::size_t>* exception_indices = nullptr,
    std::string language = "synthetic");

/// Orthography is a symbol-for-symbol copy of the phonology.
PairedCorpus make_identity_corpus(const SynthConfig& config);

/// Orthography sampled independently of the phonology (no shared
/// structure beyond marginals).
PairedCorpus make_independent_corpus(const SynthConfig& config);

/// Generation manifest: config echo plus the exception list.
std::string synth_manifest_json(const SynthConfig& config,
                                const RuleTable& rules,
                                const std::vector<std::size_t>& exceptions);

}  // namespace opacity

#endif
