#include "opacity/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"
#include "opacity/rng.hpp"

namespace opacity {

namespace {

const char* kReservedNames[kNumReserved] = {"<pad>", "<bos>", "<eos>",
                                            "<mask>"};

std::vector<std::string_view> split_lines(std::string_view text) {
    std::vector<std::string_view> lines;
    std::size_t start = 0;
    while (start <= text.size()) {
        std::size_t nl = text.find('\n', start);
        if (nl == std::string_view::npos) {
            if (start < text.size()) lines.push_back(text.substr(start));
            break;
        }
        lines.push_back(text.substr(start, nl - start));
        start = nl + 1;
    }
    // Tolerate CRLF input.
    for (auto& l : lines)
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
    return lines;
}

}  // namespace

Vocabulary Vocabulary::build(VocabKind kind,
                             const std::vector<std::string>& data_symbols) {
    Vocabulary v;
    v.kind_ = kind;
    for (const char* r : kReservedNames) v.symbols_.emplace_back(r);

    std::set<std::string> uniq(data_symbols.begin(), data_symbols.end());
    for (const char* r : kReservedNames)
        if (uniq.count(r))
            throw Error(std::string("data symbol collides with reserved token ") + r);
    v.symbols_.insert(v.symbols_.end(), uniq.begin(), uniq.end());
    for (int i = 0; i < static_cast<int>(v.symbols_.size()); ++i)
        v.index_[v.symbols_[i]] = i;
    return v;
}

Vocabulary Vocabulary::from_symbols(VocabKind kind,
                                    std::vector<std::string> full_symbols) {
    if (full_symbols.size() < kNumReserved)
        throw Error("vocabulary missing reserved tokens");
    for (int i = 0; i < kNumReserved; ++i)
        if (full_symbols[i] != kReservedNames[i])
            throw Error("vocabulary reserved tokens malformed");
    Vocabulary v;
    v.kind_ = kind;
    v.symbols_ = std::move(full_symbols);
    for (int i = 0; i < static_cast<int>(v.symbols_.size()); ++i)
        if (!v.index_.emplace(v.symbols_[i], i).second)
            throw Error("duplicate symbol in vocabulary: " + v.symbols_[i]);
    return v;
}

int Vocabulary::id_of(const std::string& sym) const {
    auto it = index_.find(sym);
    if (it == index_.end()) throw Error("symbol not in vocabulary: " + sym);
    return it->second;
}

std::string PairedCorpus::orth_text(std::size_t i) const {
    std::string out;
    for (int id : entries.at(i).first.ids) out += vocab_orth.symbol(id);
    return out;
}

std::vector<std::string> PairedCorpus::phon_segments(std::size_t i) const {
    std::vector<std::string> out;
    for (int id : entries.at(i).second.ids) out.push_back(vocab_phon.symbol(id));
    return out;
}

std::string PairedCorpus::to_json() const {
    nlohmann::json j;
    j["language"] = language;
    j["breadth"] = breadth;
    j["vocab_orth"] = vocab_orth.symbols();
    j["vocab_phon"] = vocab_phon.symbols();
    nlohmann::json ents = nlohmann::json::array();
    for (const auto& [o, p] : entries)
        ents.push_back(nlohmann::json::array({o.ids, p.ids}));
    j["entries"] = std::move(ents);
    if (!pipeline.empty()) j["pipeline"] = pipeline;
    if (truncated) j["truncated"] = true;
    return j.dump();
}

PairedCorpus PairedCorpus::from_json_text(std::string_view json_text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("corpus JSON: ") + e.what());
    }
    PairedCorpus c;
    try {
        c.language = j.at("language").get<std::string>();
        c.breadth = j.at("breadth").get<std::string>();
        c.vocab_orth = Vocabulary::from_symbols(
            VocabKind::orthographic,
            j.at("vocab_orth").get<std::vector<std::string>>());
        c.vocab_phon = Vocabulary::from_symbols(
            VocabKind::phonemic,
            j.at("vocab_phon").get<std::vector<std::string>>());
        for (const auto& ent : j.at("entries")) {
            SymbolSeq o{ent.at(0).get<std::vector<int>>(),
                        VocabKind::orthographic};
            SymbolSeq p{ent.at(1).get<std::vector<int>>(), VocabKind::phonemic};
            for (int id : o.ids)
                if (id < kNumReserved || id >= c.vocab_orth.size())
                    throw ParseError("corpus JSON: orthographic index out of range");
            for (int id : p.ids)
                if (id < kNumReserved || id >= c.vocab_phon.size())
                    throw ParseError("corpus JSON: phonemic index out of range");
            c.entries.emplace_back(std::move(o), std::move(p));
        }
        if (j.contains("pipeline"))
            c.pipeline = j["pipeline"].get<std::vector<std::string>>();
        if (j.contains("truncated")) c.truncated = j["truncated"].get<bool>();
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("corpus JSON: ") + e.what());
    }
    return c;
}

void PairedCorpus::save(const std::string& path) const {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open for writing: " + path);
    f << to_json() << '\n';
    if (!f) throw Error("write failed: " + path);
}

PairedCorpus PairedCorpus::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw Error("cannot open: " + path);
    std::stringstream ss;
    ss << f.rdbuf();
    return from_json_text(ss.str());
}

std::string PairedCorpus::digest() const {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(to_json())));
    return buf;
}

std::vector<LexiconRecord> parse_pron_lexicon(std::string_view text) {
    // Validates encoding up front so offsets refer to the whole input.
    utf8_decode(text);

    std::vector<LexiconRecord> records;
    auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string_view line = lines[ln];
        if (line.empty() || line.front() == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw ParseError("expected word<TAB>pronunciation", ln + 1);
        std::string_view word = line.substr(0, tab);
        std::string_view pron = line.substr(tab + 1);
        if (word.empty()) throw ParseError("empty word field", ln + 1);
        LexiconRecord rec;
        rec.word = std::string(word);
        std::size_t pos = 0;
        while (pos < pron.size()) {
            std::size_t sp = pron.find(' ', pos);
            std::string_view seg = (sp == std::string_view::npos)
                                       ? pron.substr(pos)
                                       : pron.substr(pos, sp - pos);
            if (!seg.empty()) rec.pron.emplace_back(seg);
            if (sp == std::string_view::npos) break;
            pos = sp + 1;
        }
        if (rec.pron.empty()) throw ParseError("empty pronunciation field", ln + 1);
        records.push_back(std::move(rec));
    }
    return records;
}

FrequencyTable parse_frequency_list(std::string_view text) {
    FrequencyTable table;
    auto lines = split_lines(text);
    for (std::size_t ln = 0; ln < lines.size(); ++ln) {
        std::string_view line = lines[ln];
        if (line.empty() || line.front() == '#') continue;
        std::size_t tab = line.find('\t');
        if (tab == std::string_view::npos)
            throw ParseError("expected word<TAB>count", ln + 1);
        std::string word(line.substr(0, tab));
        std::string_view count_sv = line.substr(tab + 1);
        if (word.empty()) throw ParseError("empty word field", ln + 1);
        if (count_sv.empty()) throw ParseError("empty count field", ln + 1);
        std::uint64_t count = 0;
        for (char ch : count_sv) {
            if (ch < '0' || ch > '9')
                throw ParseError("count is not a non-negative integer", ln + 1);
            count = count * 10 + static_cast<std::uint64_t>(ch - '0');
        }
        table[word] += count;
    }
    return table;
}

PairedCorpus select_top_n(const std::vector<LexiconRecord>& lexicon,
                          const FrequencyTable& freqs, std::size_t n,
                          std::string language, std::string breadth) {
    if (lexicon.empty()) throw Error("select_top_n: empty lexicon");
    if (n < 1) throw Error("select_top_n: n must be >= 1");
    if (breadth != "broad" && breadth != "narrow")
        throw Error("transcription breadth must be 'broad' or 'narrow'");

    // First-listed pronunciation wins for each orthographic form.
    std::vector<const LexiconRecord*> unique;
    std::unordered_map<std::string_view, bool> seen;
    for (const auto& rec : lexicon) {
        if (seen.emplace(rec.word, true).second) unique.push_back(&rec);
    }

    auto count_of = [&](const std::string& w) -> std::uint64_t {
        auto it = freqs.find(w);
        return it == freqs.end() ? 0 : it->second;
    };
    std::stable_sort(unique.begin(), unique.end(),
                     [&](const LexiconRecord* a, const LexiconRecord* b) {
                         std::uint64_t ca = count_of(a->word),
                                       cb = count_of(b->word);
                         if (ca != cb) return ca > cb;
                         return a->word < b->word;
                     });

    PairedCorpus corpus;
    corpus.language = std::move(language);
    corpus.breadth = std::move(breadth);
    corpus.truncated = unique.size() < n;
    if (unique.size() > n) unique.resize(n);

    std::vector<std::string> orth_syms, phon_syms;
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
        tokenized;
    tokenized.reserve(unique.size());
    for (const LexiconRecord* rec : unique) {
        std::vector<std::string> orth;
        for (CodePoint cp : utf8_decode(rec->word))
            orth.push_back(utf8_encode(cp));
        orth_syms.insert(orth_syms.end(), orth.begin(), orth.end());
        phon_syms.insert(phon_syms.end(), rec->pron.begin(), rec->pron.end());
        tokenized.emplace_back(std::move(orth), rec->pron);
    }
    corpus.vocab_orth = Vocabulary::build(VocabKind::orthographic, orth_syms);
    corpus.vocab_phon = Vocabulary::build(VocabKind::phonemic, phon_syms);
    for (const auto& [orth, phon] : tokenized) {
        SymbolSeq o{{}, VocabKind::orthographic};
        SymbolSeq p{{}, VocabKind::phonemic};
        for (const auto& s : orth) o.ids.push_back(corpus.vocab_orth.id_of(s));
        for (const auto& s : phon) p.ids.push_back(corpus.vocab_phon.id_of(s));
        corpus.entries.emplace_back(std::move(o), std::move(p));
    }
    return corpus;
}

PairedCorpus filter_by_script(const PairedCorpus& corpus,
                              const ScriptPredicate& predicate,
                              std::string_view predicate_name) {
    std::vector<std::pair<std::vector<std::string>, std::vector<std::string>>>
        kept;
    std::vector<std::string> orth_syms, phon_syms;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        bool all_match = true;
        for (int id : corpus.entries[i].first.ids) {
            auto cps = utf8_decode(corpus.vocab_orth.symbol(id));
            for (CodePoint cp : cps)
                if (!predicate(cp)) {
                    all_match = false;
                    break;
                }
            if (!all_match) break;
        }
        if (!all_match) continue;
        std::vector<std::string> orth;
        for (int id : corpus.entries[i].first.ids)
            orth.push_back(corpus.vocab_orth.symbol(id));
        std::vector<std::string> phon;
        for (int id : corpus.entries[i].second.ids)
            phon.push_back(corpus.vocab_phon.symbol(id));
        orth_syms.insert(orth_syms.end(), orth.begin(), orth.end());
        phon_syms.insert(phon_syms.end(), phon.begin(), phon.end());
        kept.emplace_back(std::move(orth), std::move(phon));
    }
    if (kept.empty())
        throw Error("filter_by_script: no entries match predicate '" +
                    std::string(predicate_name) + "'");

    PairedCorpus out;
    out.language = corpus.language;
    out.breadth = corpus.breadth;
    out.pipeline = corpus.pipeline;
    out.vocab_orth = Vocabulary::build(VocabKind::orthographic, orth_syms);
    out.vocab_phon = Vocabulary::build(VocabKind::phonemic, phon_syms);
    for (const auto& [orth, phon] : kept) {
        SymbolSeq o{{}, VocabKind::orthographic};
        SymbolSeq p{{}, VocabKind::phonemic};
        for (const auto& s : orth) o.ids.push_back(out.vocab_orth.id_of(s));
        for (const auto& s : phon) p.ids.push_back(out.vocab_phon.id_of(s));
        out.entries.emplace_back(std::move(o), std::move(p));
    }
    return out;
}

ScriptPredicate script_class(std::string_view name) {
    if (name == "hiragana") return [](CodePoint cp) { return is_hiragana(cp); };
    if (name == "katakana") return [](CodePoint cp) { return is_katakana(cp); };
    if (name == "han") return [](CodePoint cp) { return is_han(cp); };
    if (name == "other")
        return [](CodePoint cp) {
            return !is_hiragana(cp) && !is_katakana(cp) && !is_han(cp);
        };
    if (name == "any") return [](CodePoint) { return true; };
    throw Error("unknown script class: " + std::string(name));
}

}  // namespace opacity
