#include "facteval/text.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <unordered_set>

namespace facteval::text {

namespace {

inline bool is_space(char c) {
    return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v';
}

// Word characters for matching tokens: ASCII alphanumerics plus any
// non-ASCII byte, so multi-byte UTF-8 sequences survive untouched.
inline bool is_word_char(unsigned char c) {
    return std::isalnum(c) || c >= 0x80;
}

inline char ascii_lower(char c) {
    return (c >= 'A' && c <= 'Z') ? static_cast<char>(c - 'A' + 'a') : c;
}

// Abbreviations that do not end a sentence even when followed by an
// uppercase word. Compared case-insensitively against the word before
// the period. Kept deliberately small; extend here if a corpus needs it.
const std::unordered_set<std::string>& abbreviations() {
    static const std::unordered_set<std::string> abbrevs = {
        "dr",   "mr",   "mrs",  "ms",   "prof", "sr",   "jr",  "st",
        "vs",   "etc",  "e.g",  "i.e",  "no",   "inc",  "ltd", "co",
        "fig",  "gen",  "col",  "lt",   "capt", "sgt",  "rev", "hon",
        "univ", "dept", "approx", "jan", "feb",  "mar",  "apr", "jun",
        "jul",  "aug",  "sep",  "sept", "oct",  "nov",  "dec", "mt",
        "vol",  "pp",   "ed",   "al",   "u.s",  "u.k",
    };
    return abbrevs;
}

// Stopword list shared by NP content tokens and the editing metrics.
// Fixed for reproducibility; documented in the README.
const std::unordered_set<std::string>& stopwords() {
    static const std::unordered_set<std::string> words = {
        "a",     "about",   "above",  "after",  "again",  "against", "all",
        "am",    "an",      "and",    "any",    "are",    "as",      "at",
        "be",    "because", "been",   "before", "being",  "below",   "between",
        "both",  "but",     "by",     "can",    "could",  "did",     "do",
        "does",  "doing",   "down",   "during", "each",   "few",     "for",
        "from",  "further", "had",    "has",    "have",   "having",  "he",
        "her",   "here",    "hers",   "him",    "his",    "how",     "i",
        "if",    "in",      "into",   "is",     "it",     "its",     "just",
        "me",    "more",    "most",   "my",     "no",     "nor",     "not",
        "now",   "of",      "off",    "on",     "once",   "only",    "or",
        "other", "our",     "ours",   "out",    "over",   "own",     "same",
        "she",   "should",  "so",     "some",   "such",   "than",    "that",
        "the",   "their",   "theirs", "them",   "then",   "there",   "these",
        "they",  "this",    "those",  "through","to",     "too",     "under",
        "until", "up",      "very",   "was",    "we",     "were",    "what",
        "when",  "where",   "which",  "while",  "who",    "whom",    "why",
        "will",  "with",    "would",  "you",    "your",   "yours",
    };
    return words;
}

}  // namespace

std::string normalize_whitespace(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = true;  // leading spaces dropped
    for (char c : s) {
        if (is_space(c)) {
            in_space = true;
        } else {
            if (in_space && !out.empty()) out.push_back(' ');
            out.push_back(c);
            in_space = false;
        }
    }
    return out;
}

std::vector<std::string> whitespace_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::size_t i = 0;
    while (i < s.size()) {
        while (i < s.size() && is_space(s[i])) ++i;
        std::size_t start = i;
        while (i < s.size() && !is_space(s[i])) ++i;
        if (i > start) tokens.emplace_back(s.substr(start, i - start));
    }
    return tokens;
}

std::size_t count_whitespace_tokens(std::string_view s) {
    std::size_t count = 0;
    bool in_token = false;
    for (char c : s) {
        if (is_space(c)) {
            in_token = false;
        } else if (!in_token) {
            ++count;
            in_token = true;
        }
    }
    return count;
}

std::vector<std::string> match_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    std::string current;
    for (char c : s) {
        if (is_word_char(static_cast<unsigned char>(c))) {
            current.push_back(ascii_lower(c));
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

bool is_stopword(std::string_view token) {
    return stopwords().count(std::string(token)) > 0;
}

std::vector<std::string> content_tokens(std::string_view s) {
    std::vector<std::string> tokens;
    for (auto& t : match_tokens(s)) {
        if (!is_stopword(t)) tokens.push_back(std::move(t));
    }
    return tokens;
}

namespace {

inline bool is_terminal(char c) { return c == '.' || c == '!' || c == '?'; }
inline bool is_closer(char c) { return c == '"' || c == '\'' || c == ')' || c == ']'; }

// Word immediately before position `i` (exclusive), lowercased, with
// internal periods kept so "e.g." matches the abbreviation list.
std::string word_before(std::string_view s, std::size_t i) {
    std::size_t end = i;
    std::size_t start = end;
    while (start > 0 && !is_space(s[start - 1])) --start;
    std::string w;
    for (std::size_t j = start; j < end; ++j) w.push_back(ascii_lower(s[j]));
    return w;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view s) {
    std::vector<std::string> sentences;
    std::size_t start = 0;
    std::size_t i = 0;
    auto flush = [&](std::size_t end) {
        std::string sent = normalize_whitespace(s.substr(start, end - start));
        if (!sent.empty()) sentences.push_back(std::move(sent));
        start = end;
    };
    while (i < s.size()) {
        if (!is_terminal(s[i])) {
            ++i;
            continue;
        }
        std::size_t punct_start = i;
        while (i < s.size() && is_terminal(s[i])) ++i;
        while (i < s.size() && is_closer(s[i])) ++i;
        if (i >= s.size()) break;  // trailing punctuation, no split needed
        if (!is_space(s[i])) continue;
        std::size_t next = i;
        while (next < s.size() && is_space(s[next])) ++next;
        if (next >= s.size()) break;
        unsigned char nc = static_cast<unsigned char>(s[next]);
        if (!(std::isupper(nc) || std::isdigit(nc))) continue;
        if (s[punct_start] == '.') {
            std::string prev = word_before(s, punct_start);
            if (prev.size() == 1 && std::isalpha(static_cast<unsigned char>(prev[0]))) {
                continue;  // single-letter initial, e.g. "J. Smith"
            }
            if (abbreviations().count(prev) > 0) continue;
        }
        flush(i);
    }
    flush(s.size());
    return sentences;
}

}  // namespace facteval::text
