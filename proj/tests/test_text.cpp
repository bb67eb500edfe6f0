#include <doctest.h>

#include <random>

#include "facteval/text.hpp"
#include "test_util.hpp"

using namespace facteval;

TEST_CASE("normalize_whitespace collapses runs and trims") {
    CHECK(text::normalize_whitespace("  a \t b\n\nc ") == "a b c");
    CHECK(text::normalize_whitespace("") == "");
    CHECK(text::normalize_whitespace(" \n\t ") == "");
}

TEST_CASE("whitespace token counting") {
    CHECK(text::count_whitespace_tokens("one two  three") == 3);
    CHECK(text::count_whitespace_tokens("") == 0);
    CHECK(text::whitespace_tokens("a b").size() == 2);
}

TEST_CASE("match_tokens lowercases and strips punctuation") {
    auto t = text::match_tokens("The Cat, sat! (1992)");
    REQUIRE(t.size() == 4);
    CHECK(t[0] == "the");
    CHECK(t[1] == "cat");
    CHECK(t[2] == "sat");
    CHECK(t[3] == "1992");
}

TEST_CASE("content_tokens removes stopwords") {
    auto t = text::content_tokens("The Cat, sat!");
    REQUIRE(t.size() == 2);
    CHECK(t[0] == "cat");
    CHECK(t[1] == "sat");
    CHECK(text::content_tokens("the of and").empty());
}

TEST_CASE("split_sentences basic splits") {
    auto s = text::split_sentences("Alpha bravo. Charlie delta. Echo foxtrot.");
    REQUIRE(s.size() == 3);
    CHECK(s[0] == "Alpha bravo.");
    CHECK(s[2] == "Echo foxtrot.");
}

TEST_CASE("split_sentences respects abbreviations and initials") {
    auto s = text::split_sentences("Dr. Smith lived.");
    REQUIRE(s.size() == 1);
    s = text::split_sentences("He met J. Smith. They talked.");
    REQUIRE(s.size() == 2);
    CHECK(s[0] == "He met J. Smith.");
    s = text::split_sentences("Born in the U.S. He moved abroad.");
    CHECK(s.size() == 1);
}

TEST_CASE("split_sentences splits before digits") {
    auto s = text::split_sentences("It premiered then. 1992 was the year.");
    REQUIRE(s.size() == 2);
}

TEST_CASE("split_sentences round-trips generated sentences") {
    std::mt19937 rng(7);
    for (int round = 0; round < 25; ++round) {
        std::uniform_int_distribution<int> n_sentences(1, 20);
        std::uniform_int_distribution<int> n_words(2, 12);
        int n = n_sentences(rng);
        std::vector<std::string> expected;
        std::string joined;
        for (int i = 0; i < n; ++i) {
            std::string s = testutil::make_sentence(rng, n_words(rng));
            if (i > 0) joined += " ";
            joined += s;
            expected.push_back(std::move(s));
        }
        auto got = text::split_sentences(joined);
        REQUIRE(got.size() == expected.size());
        for (std::size_t i = 0; i < got.size(); ++i) CHECK(got[i] == expected[i]);
        // Joining and normalizing recovers the input.
        std::string rejoined;
        for (std::size_t i = 0; i < got.size(); ++i) {
            if (i > 0) rejoined += " ";
            rejoined += got[i];
        }
        CHECK(text::normalize_whitespace(rejoined) == text::normalize_whitespace(joined));
    }
}
