#include "opacity/decompose.hpp"

#include <algorithm>

#include "json.hpp"
#include "unicode_data.hpp"

namespace opacity {

namespace {

const detail::DecompEntry* find_decomp(CodePoint cp) {
    const auto* begin = detail::kDecompIndex;
    const auto* end = begin + detail::kDecompIndexSize;
    const auto* it = std::lower_bound(
        begin, end, cp,
        [](const detail::DecompEntry& e, CodePoint c) { return e.cp < c; });
    return (it != end && it->cp == cp) ? it : nullptr;
}

/// Canonical ordering: stable bubble of nonzero-ccc runs.
void canonical_reorder(std::vector<CodePoint>& cps) {
    for (std::size_t i = 1; i < cps.size(); ++i) {
        int ccc = combining_class(cps[i]);
        if (ccc == 0) continue;
        std::size_t j = i;
        while (j > 0) {
            int prev = combining_class(cps[j - 1]);
            if (prev == 0 || prev <= ccc) break;
            std::swap(cps[j - 1], cps[j]);
            --j;
        }
    }
}

}  // namespace

int combining_class(CodePoint cp) {
    const auto* begin = detail::kCccRanges;
    const auto* end = begin + detail::kCccRangesSize;
    const auto* it = std::upper_bound(
        begin, end, cp,
        [](CodePoint c, const detail::CccRange& r) { return c < r.lo; });
    if (it == begin) return 0;
    --it;
    return (cp >= it->lo && cp <= it->hi) ? it->ccc : 0;
}

std::string nfd_normalize(std::string_view s) {
    std::vector<CodePoint> out;
    for (CodePoint cp : utf8_decode(s)) {
        if (const auto* e = find_decomp(cp)) {
            // Table entries are fully expanded; Hangul is not in the table.
            for (unsigned k = 0; k < e->length; ++k)
                out.push_back(detail::kDecompPool[e->offset + k]);
        } else {
            out.push_back(cp);
        }
    }
    canonical_reorder(out);
    return utf8_encode(out);
}

std::string decompose_hangul(std::string_view s) {
    std::vector<CodePoint> out;
    for (CodePoint cp : utf8_decode(s)) {
        if (is_hangul_syllable(cp)) {
            CodePoint idx = cp - 0xAC00;
            out.push_back(detail::kCompatChoseong[idx / 588]);
            out.push_back(detail::kCompatJungseong[(idx % 588) / 28]);
            if (idx % 28 != 0)
                out.push_back(detail::kCompatJongseong[idx % 28 - 1]);
        } else {
            out.push_back(cp);
        }
    }
    return utf8_encode(out);
}

const std::u32string* HanziTable::lookup(CodePoint cp) const {
    auto it = map_.find(cp);
    return it == map_.end() ? nullptr : &it->second;
}

HanziTable HanziTable::load(std::string_view jsonl) {
    HanziTable table;
    std::size_t ln = 0;
    std::size_t start = 0;
    while (start <= jsonl.size()) {
        std::size_t nl = jsonl.find('\n', start);
        std::string_view line = (nl == std::string_view::npos)
                                    ? jsonl.substr(start)
                                    : jsonl.substr(start, nl - start);
        start = (nl == std::string_view::npos) ? jsonl.size() + 1 : nl + 1;
        ++ln;
        if (line.empty() ||
            line.find_first_not_of(" \t\r") == std::string_view::npos)
            continue;

        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::parse_error& e) {
            throw ParseError(std::string("hanzi table: ") + e.what(), ln);
        }
        std::string character, decomposition;
        try {
            character = j.at("character").get<std::string>();
            decomposition = j.at("decomposition").get<std::string>();
        } catch (const nlohmann::json::exception& e) {
            throw ParseError(std::string("hanzi table: ") + e.what(), ln);
        }
        auto key_cps = utf8_decode(character);
        if (key_cps.size() != 1)
            throw ParseError("hanzi table: 'character' must be one code point",
                             ln);
        auto decomp_cps = utf8_decode(decomposition);
        // "？" marks an unknown decomposition; such characters are atomic.
        bool atomic = decomp_cps.empty() ||
                      (decomp_cps.size() == 1 && decomp_cps[0] == 0xFF1F);
        if (atomic) continue;
        std::u32string val(decomp_cps.begin(), decomp_cps.end());
        if (val.find(key_cps[0]) != std::u32string::npos)
            throw ParseError("hanzi table: decomposition contains its own key",
                             ln);
        table.map_[key_cps[0]] = std::move(val);
    }

    // Reject cyclic tables up front; recursive expansion must terminate.
    // 0 = unvisited, 1 = on stack, 2 = done.
    std::unordered_map<char32_t, int> state;
    std::vector<std::pair<char32_t, std::size_t>> stack;
    for (const auto& [root, _] : table.map_) {
        if (state[root]) continue;
        stack.assign(1, {root, 0});
        state[root] = 1;
        while (!stack.empty()) {
            auto& [cp, pos] = stack.back();
            const std::u32string& d = table.map_.at(cp);
            bool descended = false;
            while (pos < d.size()) {
                char32_t child = d[pos++];
                if (!table.map_.count(child)) continue;
                int st = state[child];
                if (st == 1)
                    throw Error("hanzi table: decomposition cycle through " +
                                utf8_encode(child));
                if (st == 0) {
                    state[child] = 1;
                    stack.push_back({child, 0});
                    descended = true;
                    break;
                }
            }
            if (!descended && stack.back().second >= d.size()) {
                state[stack.back().first] = 2;
                stack.pop_back();
            }
        }
    }
    return table;
}

std::string decompose_hanzi(std::string_view s, const HanziTable& table,
                            HanziDepth depth) {
    std::vector<CodePoint> out;
    std::vector<CodePoint> work;
    for (CodePoint cp : utf8_decode(s)) {
        const std::u32string* d = table.lookup(cp);
        if (!d) {
            out.push_back(cp);
            continue;
        }
        if (depth == HanziDepth::one_level) {
            out.insert(out.end(), d->begin(), d->end());
            continue;
        }
        // Recursive: expand until every component is atomic or unknown.
        // Termination is guaranteed by the acyclicity check at load.
        work.assign(d->rbegin(), d->rend());
        while (!work.empty()) {
            CodePoint c = work.back();
            work.pop_back();
            if (const std::u32string* sub = table.lookup(c))
                work.insert(work.end(), sub->rbegin(), sub->rend());
            else
                out.push_back(c);
        }
    }
    return utf8_encode(out);
}

PairedCorpus apply_decomposition_pipeline(const PairedCorpus& corpus,
                                          const DecomposeConfig& config,
                                          const HanziTable* table) {
    if (config.hanzi && !table)
        throw ConfigError("hanzi decomposition requested without a table");

    auto already = [&](const std::string& tag) {
        return std::find(corpus.pipeline.begin(), corpus.pipeline.end(), tag) !=
               corpus.pipeline.end();
    };
    std::string hanzi_tag = config.hanzi_depth == HanziDepth::one_level
                                ? "hanzi:one-level"
                                : "hanzi:recursive";
    // Stages already recorded in the metadata are not re-applied, which
    // makes the pipeline idempotent (one-level hanzi expansion would
    // otherwise keep digging on a second run).
    bool do_hangul = config.hangul && !already("hangul");
    bool do_hanzi = config.hanzi && !already(hanzi_tag);
    bool do_nfd = config.nfd && !already("nfd");
    if (!do_hangul && !do_hanzi && !do_nfd) return corpus;

    PairedCorpus out;
    out.language = corpus.language;
    out.breadth = corpus.breadth;
    out.vocab_phon = corpus.vocab_phon;
    out.pipeline = corpus.pipeline;
    out.truncated = corpus.truncated;
    if (do_hangul) out.pipeline.push_back("hangul");
    if (do_hanzi) out.pipeline.push_back(hanzi_tag);
    if (do_nfd) out.pipeline.push_back("nfd");

    std::vector<std::string> orth_words;
    orth_words.reserve(corpus.size());
    std::vector<std::string> orth_syms;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        std::string w = corpus.orth_text(i);
        if (do_hangul) w = decompose_hangul(w);
        if (do_hanzi) w = decompose_hanzi(w, *table, config.hanzi_depth);
        if (do_nfd) w = nfd_normalize(w);
        for (CodePoint cp : utf8_decode(w)) orth_syms.push_back(utf8_encode(cp));
        orth_words.push_back(std::move(w));
    }
    out.vocab_orth = Vocabulary::build(VocabKind::orthographic, orth_syms);
    for (std::size_t i = 0; i < corpus.size(); ++i) {
        SymbolSeq o{{}, VocabKind::orthographic};
        for (CodePoint cp : utf8_decode(orth_words[i]))
            o.ids.push_back(out.vocab_orth.id_of(utf8_encode(cp)));
        out.entries.emplace_back(std::move(o), corpus.entries[i].second);
    }
    return out;
}

}  // namespace opacity
