#include "opacity/decompose.hpp"

#include "doctest.h"
#include "opacity/rng.hpp"

using namespace opacity;

namespace {

// NFD reference vectors computed with CPython's unicodedata (UCD 13.0.0).
// Inputs avoid Hangul syllables, which this normalizer deliberately skips.
const std::pair<const char*, const char*> kNfdVectors[] = {
    {"é", "é"},
    {"Å", "Å"},
    {"Å", "Å"},
    {"Ω", "Ω"},
    {"ǻ", "ǻ"},
    {"ᾧ", "ᾧ"},
    {"ё", "ё"},
    {"ṩ", "ṩ"},
    {"q̣̇", "q̣̇"},
    {"ํุ่", "ํุ่"},
    {"café naïve", "café naïve"},
    {"がばぱ", "がばぱ"},
    {"é́", "é́"},
    {"ﬃ", "ﬃ"},  // compatibility-only decompositions stay put
    {"½", "½"},
    {"ą́", "ą́"},
};

std::string random_unicode_string(Pcg32& rng) {
    // Mix of ASCII, Latin-1 accents, combining marks, Greek, kana, Han.
    static const CodePoint pool[] = {
        'a',    'z',    '0',    0x00E9, 0x00C5, 0x0301, 0x0323, 0x0328,
        0x03B1, 0x03C9, 0x0451, 0x1E69, 0x2126, 0x212B, 0x304C, 0x30AB,
        0x4E2D, 0x6C34, 0x1FA7, 0x0E48, 0x0E4D};
    std::vector<CodePoint> cps;
    std::size_t len = 1 + rng.next_below(12);
    for (std::size_t i = 0; i < len; ++i)
        cps.push_back(pool[rng.next_below(std::size(pool))]);
    return utf8_encode(cps);
}

}  // namespace

TEST_CASE("nfd_normalize matches the reference normalizer") {
    for (const auto& [input, expected] : kNfdVectors)
        CHECK(nfd_normalize(input) == expected);
}

TEST_CASE("nfd_normalize is idempotent on random strings") {
    Pcg32 rng(42, 54);
    for (int i = 0; i < 500; ++i) {
        std::string s = random_unicode_string(rng);
        std::string once = nfd_normalize(s);
        CHECK(nfd_normalize(once) == once);
    }
}

TEST_CASE("nfd_normalize leaves ASCII alone") {
    CHECK(nfd_normalize("a") == "a");
    CHECK(nfd_normalize("plain ascii text") == "plain ascii text");
    CHECK(nfd_normalize("") == "");
}

TEST_CASE("decompose_hangul arithmetic examples") {
    CHECK(decompose_hangul("한") == "ㅎㅏㄴ");  // 한 -> ㅎㅏㄴ
    CHECK(decompose_hangul("가") == "ㄱㅏ");        // 가 -> ㄱㅏ
    CHECK(decompose_hangul("a") == "a");
    CHECK(decompose_hangul("") == "");
}

TEST_CASE("decompose_hangul full-range oracle") {
    // Independent route: arithmetic to *conjoining* jamo, then mapped to
    // the compatibility plane with tables transcribed from the UCD
    // compatibility decompositions.
    static const char32_t cho[19] = {
        0x3131, 0x3132, 0x3134, 0x3137, 0x3138, 0x3139, 0x3141, 0x3142,
        0x3143, 0x3145, 0x3146, 0x3147, 0x3148, 0x3149, 0x314A, 0x314B,
        0x314C, 0x314D, 0x314E};
    static const char32_t jong[27] = {
        0x3131, 0x3132, 0x3133, 0x3134, 0x3135, 0x3136, 0x3137, 0x3139,
        0x313A, 0x313B, 0x313C, 0x313D, 0x313E, 0x313F, 0x3140, 0x3141,
        0x3142, 0x3144, 0x3145, 0x3146, 0x3147, 0x3148, 0x314A, 0x314B,
        0x314C, 0x314D, 0x314E};
    for (char32_t cp = 0xAC00; cp <= 0xD7A3; ++cp) {
        char32_t idx = cp - 0xAC00;
        std::vector<CodePoint> expected;
        expected.push_back(cho[idx / 588]);
        expected.push_back(0x314F + (idx % 588) / 28);  // medials contiguous
        if (idx % 28) expected.push_back(jong[idx % 28 - 1]);
        CHECK(decompose_hangul(utf8_encode(cp)) == utf8_encode(expected));
    }
}

TEST_CASE("decompose_hangul output has no precomposed syllables and is idempotent") {
    Pcg32 rng(7, 9);
    for (int i = 0; i < 300; ++i) {
        std::vector<CodePoint> cps;
        for (int j = 0; j < 6; ++j)
            cps.push_back(0xAC00 + rng.next_below(11172));
        std::string s = utf8_encode(cps);
        std::string once = decompose_hangul(s);
        for (CodePoint cp : utf8_decode(once))
            CHECK_FALSE(is_hangul_syllable(cp));
        CHECK(decompose_hangul(once) == once);
    }
}

namespace {

const char* kTinyHanziJsonl =
    "{\"character\":\"好\",\"decomposition\":\"⿰女子\"}\n"
    "{\"character\":\"一\",\"decomposition\":\"？\"}\n"
    "{\"character\":\"子\",\"decomposition\":\"⿱了一\"}\n";

}  // namespace

TEST_CASE("hanzi table load and lookup") {
    auto table = HanziTable::load(kTinyHanziJsonl);
    CHECK(table.size() == 2);                 // placeholder entry is atomic
    CHECK(table.has(U'好'));
    CHECK_FALSE(table.has(U'一'));
    CHECK_THROWS_AS(HanziTable::load("not json\n"), ParseError);
    CHECK_THROWS_AS(
        HanziTable::load("{\"character\":\"ab\",\"decomposition\":\"x\"}\n"),
        ParseError);
}

TEST_CASE("hanzi table rejects self-loops and cycles") {
    CHECK_THROWS_AS(HanziTable::load("{\"character\":\"好\","
                                     "\"decomposition\":\"⿰好子\"}\n"),
                    ParseError);
    const char* cyclic =
        "{\"character\":\"好\",\"decomposition\":\"子\"}\n"
        "{\"character\":\"子\",\"decomposition\":\"好\"}\n";
    CHECK_THROWS_AS(HanziTable::load(cyclic), Error);
}

TEST_CASE("decompose_hanzi one-level and recursive") {
    auto table = HanziTable::load(kTinyHanziJsonl);
    CHECK(decompose_hanzi("好", table, HanziDepth::one_level) ==
          "⿰女子");
    // recursive expands 子 further; 一 is atomic, IDC marks are kept
    CHECK(decompose_hanzi("好", table, HanziDepth::recursive) ==
          "⿰女⿱了一");
    CHECK(decompose_hanzi("x中y", table, HanziDepth::recursive) ==
          "x中y");  // absent characters pass through
}

TEST_CASE("recursive output contains no decomposable key") {
    auto table = HanziTable::load(kTinyHanziJsonl);
    auto out = decompose_hanzi("好子好", table,
                               HanziDepth::recursive);
    for (CodePoint cp : utf8_decode(out)) CHECK_FALSE(table.has(cp));
}

namespace {

PairedCorpus korean_corpus() {
    std::vector<LexiconRecord> lex{
        {"한국", {"h", "a", "n"}},  // 한국
        {"가", {"k", "a"}},
    };
    return select_top_n(lex, {}, 10, "kor");
}

}  // namespace

TEST_CASE("apply_decomposition_pipeline identity when all stages off") {
    auto corpus = korean_corpus();
    auto out = apply_decomposition_pipeline(corpus, DecomposeConfig{});
    CHECK(out == corpus);
}

TEST_CASE("apply_decomposition_pipeline hangul rewrites orthography") {
    auto corpus = korean_corpus();
    DecomposeConfig cfg;
    cfg.hangul = true;
    auto out = apply_decomposition_pipeline(corpus, cfg);
    REQUIRE(out.size() == corpus.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
        for (CodePoint cp : utf8_decode(out.orth_text(i)))
            CHECK_FALSE(is_hangul_syllable(cp));
        // phonology untouched
        CHECK(out.phon_segments(i) == corpus.phon_segments(i));
    }
    CHECK(out.pipeline == std::vector<std::string>{"hangul"});
}

TEST_CASE("apply_decomposition_pipeline is idempotent") {
    auto corpus = korean_corpus();
    DecomposeConfig cfg;
    cfg.hangul = true;
    cfg.nfd = true;
    auto once = apply_decomposition_pipeline(corpus, cfg);
    auto twice = apply_decomposition_pipeline(once, cfg);
    CHECK(twice == once);
}

TEST_CASE("pipeline preserves entry count and order") {
    auto table = HanziTable::load(kTinyHanziJsonl);
    std::vector<LexiconRecord> lex{
        {"好", {"h", "ao"}}, {"x", {"k", "s"}}, {"子", {"z", "i"}}};
    auto corpus = select_top_n(lex, {{"好", 3}, {"x", 2}, {"子", 1}}, 10);
    DecomposeConfig cfg;
    cfg.hanzi = true;
    cfg.hanzi_depth = HanziDepth::recursive;
    auto out = apply_decomposition_pipeline(corpus, cfg, &table);
    REQUIRE(out.size() == 3);
    CHECK(out.orth_text(1) == "x");
    CHECK(out.phon_segments(0) == corpus.phon_segments(0));
    CHECK(out.pipeline == std::vector<std::string>{"hanzi:recursive"});
}

TEST_CASE("pipeline requires a table for hanzi") {
    auto corpus = korean_corpus();
    DecomposeConfig cfg;
    cfg.hanzi = true;
    CHECK_THROWS_AS(apply_decomposition_pipeline(corpus, cfg), ConfigError);
}
