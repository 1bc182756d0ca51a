#include "opacity/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "json.hpp"
#include "opacity/rng.hpp"

namespace opacity {

namespace {

// Single-code-point symbol pools. 36 phonemes / 40 graphemes is plenty
// for the validation harness; sizes beyond that are rejected.
const char* kPhonemePool[] = {
    "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l",
    "m", "n", "o", "p", "q", "r", "s", "t", "u", "v", "w", "x",
    "y", "z", "0", "1", "2", "3", "4", "5", "6", "7", "8", "9"};
const char* kGraphemePool[] = {
    "A", "B", "C", "D", "E", "F", "G", "H", "I", "J", "K", "L", "M", "N",
    "O", "P", "Q", "R", "S", "T", "U", "V", "W", "X", "Y", "Z",
    "Α", "Β", "Γ", "Δ", "Ε", "Ζ", "Η",
    "Θ", "Ι", "Κ", "Λ", "Μ", "Ν", "Ξ"};

std::vector<std::string> pool_prefix(const char* const* pool, int pool_size,
                                     int n, const char* what) {
    if (n < 1 || n > pool_size)
        throw Error(std::string(what) + " alphabet size must be in 1.." +
                    std::to_string(pool_size));
    return {pool, pool + n};
}

double stop_probability(const SynthConfig& c) {
    // Geometric from min_length with stop probability q has mean
    // min_length + (1-q)/q; solve for the requested mean.
    double excess = c.mean_length - c.min_length;
    return 1.0 / (1.0 + excess);
}

int sample_length(const SynthConfig& c, double q, Pcg32& rng) {
    int len = c.min_length;
    while (len < c.max_length && rng.next_double() >= q) ++len;
    return len;
}

std::vector<std::vector<std::string>> sample_unique_words(
    const SynthConfig& c, const std::vector<std::string>& alphabet,
    Pcg32& rng) {
    // Pigeonhole check: total strings in the length window must cover N.
    double capacity = 0;
    for (int l = c.min_length; l <= c.max_length; ++l) {
        capacity += std::pow(static_cast<double>(alphabet.size()), l);
        if (capacity >= 2.0 * c.corpus_size) break;
    }
    if (capacity < static_cast<double>(c.corpus_size))
        throw Error("alphabet too small to produce " +
                    std::to_string(c.corpus_size) +
                    " unique words under the length cap");

    double q = stop_probability(c);
    std::set<std::vector<std::string>> seen;
    std::vector<std::vector<std::string>> words;
    words.reserve(c.corpus_size);
    std::uint64_t attempts = 0;
    const std::uint64_t max_attempts =
        1000ull * static_cast<std::uint64_t>(c.corpus_size) + 10000ull;
    while (words.size() < static_cast<std::size_t>(c.corpus_size)) {
        if (++attempts > max_attempts)
            throw Error("resampling budget exhausted; alphabet too small "
                        "for the requested corpus size");
        int len = sample_length(c, q, rng);
        std::vector<std::string> w(len);
        for (int i = 0; i < len; ++i)
            w[i] = alphabet[rng.next_below(
                static_cast<std::uint32_t>(alphabet.size()))];
        if (seen.insert(w).second) words.push_back(std::move(w));
    }
    return words;
}

PairedCorpus build_corpus(
    const std::vector<std::vector<std::string>>& orth_words,
    const std::vector<std::vector<std::string>>& phon_words,
    std::string language) {
    std::vector<std::string> orth_syms, phon_syms;
    for (const auto& w : orth_words)
        orth_syms.insert(orth_syms.end(), w.begin(), w.end());
    for (const auto& w : phon_words)
        phon_syms.insert(phon_syms.end(), w.begin(), w.end());

    PairedCorpus corpus;
    corpus.language = std::move(language);
    corpus.breadth = "broad";
    corpus.vocab_orth = Vocabulary::build(VocabKind::orthographic, orth_syms);
    corpus.vocab_phon = Vocabulary::build(VocabKind::phonemic, phon_syms);
    for (std::size_t i = 0; i < phon_words.size(); ++i) {
        SymbolSeq o{{}, VocabKind::orthographic};
        SymbolSeq p{{}, VocabKind::phonemic};
        for (const auto& s : orth_words[i])
            o.ids.push_back(corpus.vocab_orth.id_of(s));
        for (const auto& s : phon_words[i])
            p.ids.push_back(corpus.vocab_phon.id_of(s));
        corpus.entries.emplace_back(std::move(o), std::move(p));
    }
    return corpus;
}

}  // namespace

RuleTable RuleTable::identity(const std::vector<std::string>& alphabet) {
    RuleTable t;
    for (const auto& p : alphabet) t.rules.push_back(GpcRule{{p}, {p}});
    return t;
}

void RuleTable::validate(const std::vector<std::string>& alphabet) const {
    for (const auto& p : alphabet) {
        bool covered = false;
        for (const auto& r : rules)
            if (r.phonemes.size() == 1 && r.phonemes[0] == p) {
                covered = true;
                break;
            }
        if (!covered)
            throw Error("rule table not total: phoneme '" + p +
                        "' has no length-1 rule");
    }
    for (const auto& r : rules) {
        if (r.phonemes.empty() || r.phonemes.size() > 3)
            throw Error("rule n-gram length must be 1..3");
        if (r.graphemes.empty()) throw Error("rule with empty spelling");
    }
}

std::vector<std::string> RuleTable::spell(
    const std::vector<std::string>& phonemes) const {
    std::vector<std::string> out;
    std::size_t i = 0;
    while (i < phonemes.size()) {
        const GpcRule* hit = nullptr;
        std::size_t max_n =
            std::min<std::size_t>(3, phonemes.size() - i);
        for (std::size_t n = max_n; n >= 1 && !hit; --n) {
            for (const auto& r : rules) {
                if (r.phonemes.size() != n) continue;
                if (std::equal(r.phonemes.begin(), r.phonemes.end(),
                               phonemes.begin() + i)) {
                    hit = &r;
                    break;
                }
            }
        }
        if (!hit)
            throw Error("rule table not total over input at position " +
                        std::to_string(i));
        out.insert(out.end(), hit->graphemes.begin(), hit->graphemes.end());
        i += hit->phonemes.size();
    }
    return out;
}

std::vector<std::string> RuleTable::grapheme_inventory() const {
    std::set<std::string> inv;
    for (const auto& r : rules) inv.insert(r.graphemes.begin(), r.graphemes.end());
    return {inv.begin(), inv.end()};
}

int RuleTable::max_ngram() const {
    std::size_t m = 0;
    for (const auto& r : rules) m = std::max(m, r.phonemes.size());
    return static_cast<int>(m);
}

void SynthConfig::validate() const {
    if (corpus_size < 1) throw ConfigError("corpus_size must be >= 1");
    if (exception_rate < 0.0 || exception_rate > 1.0)
        throw ConfigError("exception_rate must be in [0, 1]");
    if (min_length < 1 || max_length < min_length)
        throw ConfigError("invalid length bounds");
    if (mean_length < min_length)
        throw ConfigError("mean_length must be >= min_length");
    if (alphabet_size < 1) throw ConfigError("alphabet_size must be >= 1");
}

double SynthConfig::expected_word_length() const {
    double q = stop_probability(*this);
    double mean = 0.0, tail = 1.0;
    for (int l = min_length; l < max_length; ++l) {
        mean += l * tail * q;
        tail *= (1.0 - q);
    }
    mean += max_length * tail;
    return mean;
}

double SynthConfig::length_entropy_bits() const {
    double q = stop_probability(*this);
    double h = 0.0, tail = 1.0;
    for (int l = min_length; l < max_length; ++l) {
        double p = tail * q;
        if (p > 0) h -= p * std::log2(p);
        tail *= (1.0 - q);
    }
    if (tail > 0) h -= tail * std::log2(tail);
    return h;
}

std::string SynthConfig::to_json() const {
    nlohmann::json j;
    j["alphabet_size"] = alphabet_size;
    j["mean_length"] = mean_length;
    j["min_length"] = min_length;
    j["max_length"] = max_length;
    j["corpus_size"] = corpus_size;
    j["exception_rate"] = exception_rate;
    j["seed"] = seed;
    return j.dump();
}

SynthConfig SynthConfig::from_json_text(std::string_view text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("synth config: ") + e.what());
    }
    SynthConfig c;
    try {
        c.alphabet_size = j.value("alphabet_size", c.alphabet_size);
        c.mean_length = j.value("mean_length", c.mean_length);
        c.min_length = j.value("min_length", c.min_length);
        c.max_length = j.value("max_length", c.max_length);
        c.corpus_size = j.value("corpus_size", c.corpus_size);
        c.exception_rate = j.value("exception_rate", c.exception_rate);
        c.seed = j.value("seed", c.seed);
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("synth config: ") + e.what());
    }
    c.validate();
    return c;
}

std::vector<std::string> phoneme_alphabet(int size) {
    return pool_prefix(kPhonemePool, std::size(kPhonemePool), size, "phoneme");
}

std::vector<std::string> grapheme_alphabet(int size) {
    return pool_prefix(kGraphemePool, std::size(kGraphemePool), size,
                       "grapheme");
}

std::vector<std::vector<std::string>> gen_phonology(const SynthConfig& config) {
    config.validate();
    auto alphabet = phoneme_alphabet(config.alphabet_size);
    Pcg32 rng = Pcg32::from_seed(config.seed, "phonology");
    return sample_unique_words(config, alphabet, rng);
}

RuleTable gen_rule_table(int level, const std::vector<std::string>& alphabet,
                         std::uint64_t seed) {
    if (level < 1 || level > 5) throw Error("rule level must be in 1..5");
    const int a = static_cast<int>(alphabet.size());
    // Extra graphemes beyond the bijective images keep context rules
    // visually distinct from the base mapping.
    auto graphemes = grapheme_alphabet(std::min<int>(
        a + 8, static_cast<int>(std::size(kGraphemePool))));

    RuleTable t;
    for (int i = 0; i < a; ++i)
        t.rules.push_back(GpcRule{{alphabet[i]}, {graphemes[i]}});

    Pcg32 rng = Pcg32::from_seed(seed, "rules:level" + std::to_string(level));
    std::set<std::vector<std::string>> used;  // n-gram patterns already taken
    int extra = (level - 1) * a;
    for (int r = 0; r < extra; ++r) {
        int n = (level >= 4 && r % 2 == 1) ? 3 : 2;
        std::vector<std::string> pat;
        for (int tries = 0;; ++tries) {
            if (tries > 10000)
                throw Error("could not sample distinct rule patterns");
            pat.clear();
            for (int i = 0; i < n; ++i)
                pat.push_back(
                    alphabet[rng.next_below(static_cast<std::uint32_t>(a))]);
            if (used.insert(pat).second) break;
        }
        int out_len = 2 + static_cast<int>(rng.next_below(2));  // 2..3
        std::vector<std::string> out;
        for (int i = 0; i < out_len; ++i)
            out.push_back(graphemes[rng.next_below(
                static_cast<std::uint32_t>(graphemes.size()))]);
        t.rules.push_back(GpcRule{std::move(pat), std::move(out)});
    }
    t.validate(alphabet);
    return t;
}

PairedCorpus gen_orthography(
    const std::vector<std::vector<std::string>>& phon_words,
    const RuleTable& rules, double exception_rate, std::uint64_t seed,
    std::vector<std::size_t>* exception_indices, std::string language) {
    if (exception_rate < 0.0 || exception_rate > 1.0)
        throw Error("exception rate must be in [0, 1]");
    auto inventory = rules.grapheme_inventory();
    Pcg32 rng = Pcg32::from_seed(seed, "orthography");

    std::vector<std::vector<std::string>> orth_words;
    orth_words.reserve(phon_words.size());
    for (std::size_t i = 0; i < phon_words.size(); ++i) {
        auto spelled = rules.spell(phon_words[i]);
        if (rng.next_double() < exception_rate) {
            // Memorized exception: fixed random spelling, same length.
            std::vector<std::string> ex(spelled.size());
            for (auto& g : ex)
                g = inventory[rng.next_below(
                    static_cast<std::uint32_t>(inventory.size()))];
            spelled = std::move(ex);
            if (exception_indices) exception_indices->push_back(i);
        }
        orth_words.push_back(std::move(spelled));
    }
    return build_corpus(orth_words, phon_words, std::move(language));
}

PairedCorpus make_identity_corpus(const SynthConfig& config) {
    auto phon = gen_phonology(config);
    auto rules = RuleTable::identity(phoneme_alphabet(config.alphabet_size));
    return gen_orthography(phon, rules, 0.0, config.seed, nullptr,
                           "synthetic-identity");
}

PairedCorpus make_independent_corpus(const SynthConfig& config) {
    auto phon = gen_phonology(config);
    auto graphemes = grapheme_alphabet(config.alphabet_size);
    Pcg32 rng = Pcg32::from_seed(config.seed, "independent-orth");
    auto orth = sample_unique_words(config, graphemes, rng);
    return build_corpus(orth, phon, "synthetic-independent");
}

std::string synth_manifest_json(const SynthConfig& config,
                                const RuleTable& rules,
                                const std::vector<std::size_t>& exceptions) {
    nlohmann::json j;
    j["config"] = nlohmann::json::parse(config.to_json());
    nlohmann::json rl = nlohmann::json::array();
    for (const auto& r : rules.rules)
        rl.push_back({{"phonemes", r.phonemes}, {"graphemes", r.graphemes}});
    j["rules"] = std::move(rl);
    j["exception_indices"] = exceptions;
    return j.dump();
}

}  // namespace opacity
