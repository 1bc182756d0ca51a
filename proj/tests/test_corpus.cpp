#include "opacity/corpus.hpp"

#include "doctest.h"
#include "opacity/rng.hpp"

using namespace opacity;

TEST_CASE("parse_pron_lexicon basic layout") {
    auto recs = parse_pron_lexicon("cat\tk æ t\n");
    REQUIRE(recs.size() == 1);
    CHECK(recs[0].word == "cat");
    CHECK(recs[0].pron == std::vector<std::string>{"k", "æ", "t"});
}

TEST_CASE("parse_pron_lexicon keeps duplicates at parse stage") {
    auto recs = parse_pron_lexicon("dog\td ɔ ɡ\ndog\td ɒ ɡ\n");
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].word == "dog");
    CHECK(recs[1].word == "dog");
    CHECK(recs[0].pron != recs[1].pron);
}

TEST_CASE("parse_pron_lexicon errors carry line numbers") {
    CHECK_THROWS_AS(parse_pron_lexicon("bad line with no tab"), ParseError);
    try {
        parse_pron_lexicon("ok\ta b\nbad line\n");
        FAIL("expected ParseError");
    } catch (const ParseError& e) {
        CHECK(e.line() == 2);
    }
    CHECK_THROWS_AS(parse_pron_lexicon("\ta b\n"), ParseError);   // empty word
    CHECK_THROWS_AS(parse_pron_lexicon("x\t\n"), ParseError);     // empty pron
    CHECK_THROWS_AS(parse_pron_lexicon("x\ta\xFF\xFE\n"), ParseError);
}

TEST_CASE("parse_pron_lexicon skips comments and blank lines") {
    auto recs = parse_pron_lexicon("# header\n\ncat\tk a t\n");
    REQUIRE(recs.size() == 1);
}

TEST_CASE("parse_frequency_list sums duplicates") {
    auto t = parse_frequency_list("the\t100\ncat\t7\n");
    CHECK(t.at("the") == 100);
    CHECK(t.at("cat") == 7);
    auto t2 = parse_frequency_list("a\t1\na\t2\n");
    CHECK(t2.at("a") == 3);
}

TEST_CASE("parse_frequency_list rejects non-integer counts") {
    CHECK_THROWS_AS(parse_frequency_list("x\tNaN\n"), ParseError);
    CHECK_THROWS_AS(parse_frequency_list("x\t-3\n"), ParseError);
    CHECK_THROWS_AS(parse_frequency_list("x\t1.5\n"), ParseError);
}

namespace {

std::vector<LexiconRecord> tiny_lexicon() {
    return {
        {"a", {"a"}},
        {"b", {"b"}},
        {"c", {"c"}},
    };
}

}  // namespace

TEST_CASE("select_top_n ranks by count then lexicographic") {
    FrequencyTable freqs{{"a", 3}, {"b", 2}, {"c", 1}};
    auto corpus = select_top_n(tiny_lexicon(), freqs, 2);
    REQUIRE(corpus.size() == 2);
    CHECK(corpus.orth_text(0) == "a");
    CHECK(corpus.orth_text(1) == "b");
    CHECK_FALSE(corpus.truncated);
}

TEST_CASE("select_top_n keeps the first pronunciation per form") {
    std::vector<LexiconRecord> lex{{"dog", {"d", "ɔ", "ɡ"}},
                                   {"dog", {"d", "ɒ", "ɡ"}}};
    auto corpus = select_top_n(lex, {}, 1);
    REQUIRE(corpus.size() == 1);
    CHECK(corpus.phon_segments(0) ==
          std::vector<std::string>{"d", "ɔ", "ɡ"});
}

TEST_CASE("select_top_n clamps and flags when fewer forms exist") {
    auto corpus = select_top_n(tiny_lexicon(), {}, 5032);
    CHECK(corpus.size() == 3);
    CHECK(corpus.truncated);
}

TEST_CASE("select_top_n missing words count zero, ties lexicographic") {
    // b absent from table -> count 0; ties a/c broken by byte order
    FrequencyTable freqs{{"a", 1}, {"c", 1}};
    auto corpus = select_top_n(tiny_lexicon(), freqs, 3);
    CHECK(corpus.orth_text(0) == "a");
    CHECK(corpus.orth_text(1) == "c");
    CHECK(corpus.orth_text(2) == "b");
}

TEST_CASE("select_top_n rejects empty lexicon and bad breadth") {
    CHECK_THROWS_AS(select_top_n({}, {}, 1), Error);
    CHECK_THROWS_AS(select_top_n(tiny_lexicon(), {}, 1, "x", "medium"), Error);
}

TEST_CASE("select_top_n is deterministic") {
    FrequencyTable freqs{{"a", 3}, {"b", 3}, {"c", 1}};
    auto c1 = select_top_n(tiny_lexicon(), freqs, 3, "xx", "narrow");
    auto c2 = select_top_n(tiny_lexicon(), freqs, 3, "xx", "narrow");
    CHECK(c1 == c2);
    CHECK(c1.to_json() == c2.to_json());
}

TEST_CASE("corpus JSON round-trip") {
    FrequencyTable freqs{{"a", 3}};
    auto corpus = select_top_n(tiny_lexicon(), freqs, 3, "tst", "narrow");
    auto back = PairedCorpus::from_json_text(corpus.to_json());
    CHECK(back == corpus);
}

TEST_CASE("corpus JSON rejects malformed input") {
    CHECK_THROWS_AS(PairedCorpus::from_json_text("{not json"), ParseError);
    CHECK_THROWS_AS(PairedCorpus::from_json_text("{}"), ParseError);
}

TEST_CASE("filter_by_script selects whole-script entries") {
    // katakana and mixed-script entries
    std::vector<LexiconRecord> lex{
        {"カメ", {"k", "a", "m", "e"}},   // katakana only
        {"かめ", {"k", "a", "m", "e2"}},  // hiragana only
        {"椅子", {"i", "s", "u"}},        // han only
        {"カ子", {"k", "a", "k", "o"}},   // mixed katakana+han
    };
    auto corpus = select_top_n(lex, {}, 10, "jpn");

    auto kk = filter_by_script(corpus, script_class("katakana"), "katakana");
    REQUIRE(kk.size() == 1);
    CHECK(kk.orth_text(0) == "カメ");

    auto han = filter_by_script(corpus, script_class("han"), "han");
    REQUIRE(han.size() == 1);
    CHECK(han.orth_text(0) == "椅子");

    auto all = filter_by_script(corpus, script_class("any"), "any");
    CHECK(all.entries.size() == corpus.entries.size());
    for (std::size_t i = 0; i < all.size(); ++i)
        CHECK(all.orth_text(i) == corpus.orth_text(i));

    try {
        filter_by_script(corpus, [](CodePoint) { return false; }, "never");
        FAIL("expected Error");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("never") != std::string::npos);
    }
}

TEST_CASE("filter_by_script preserves order (subset property)") {
    std::vector<LexiconRecord> lex{
        {"ab", {"a", "b"}}, {"カ", {"k"}}, {"cd", {"c", "d"}}};
    auto corpus = select_top_n(lex, {{"ab", 3}, {"カ", 2}, {"cd", 1}}, 10);
    auto latin = filter_by_script(corpus, script_class("other"), "other");
    REQUIRE(latin.size() == 2);
    CHECK(latin.orth_text(0) == "ab");
    CHECK(latin.orth_text(1) == "cd");
}

TEST_CASE("vocabulary is sorted, reserved tokens fixed") {
    auto v = Vocabulary::build(VocabKind::phonemic, {"z", "a", "m", "a"});
    CHECK(v.size() == kNumReserved + 3);
    CHECK(v.symbol(kPadId) == "<pad>");
    CHECK(v.symbol(kNumReserved) == "a");
    CHECK(v.id_of("z") == kNumReserved + 2);
    CHECK_THROWS_AS(v.id_of("q"), Error);
    CHECK_THROWS_AS(
        Vocabulary::build(VocabKind::phonemic, {"<pad>"}), Error);
}
