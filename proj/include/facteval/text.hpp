#ifndef FACTEVAL_TEXT_HPP
#define FACTEVAL_TEXT_HPP

#include <string>
#include <string_view>
#include <vector>

namespace facteval::text {

/// Collapse runs of ASCII whitespace to single spaces and trim the ends.
std::string normalize_whitespace(std::string_view s);

/// Split on ASCII whitespace. This is the tokenization used for passage
/// size limits and per-response token statistics.
std::vector<std::string> whitespace_tokens(std::string_view s);

std::size_t count_whitespace_tokens(std::string_view s);

/// Matching tokens: lowercased maximal runs of alphanumeric characters
/// (bytes >= 0x80 are kept as word characters so UTF-8 text stays intact).
/// Used for BM25 term statistics, query tokenization and edit-metric
/// normalization. No stemming, no stopword removal here.
std::vector<std::string> match_tokens(std::string_view s);

bool is_stopword(std::string_view token);

/// match_tokens with stopwords removed. This is the shared normalization
/// for NP content tokens and the editing metrics.
std::vector<std::string> content_tokens(std::string_view s);

/// Rule-based sentence splitter: a sentence ends at a run of [.!?]
/// (optionally followed by closing quotes/brackets) when the next
/// non-space character is an uppercase letter or a digit. Splits are
/// suppressed after a fixed abbreviation list (Dr., Mr., e.g., ...) and
/// after single-letter initials. Joining the output with single spaces
/// and normalizing whitespace recovers the normalized input.
std::vector<std::string> split_sentences(std::string_view s);

}  // namespace facteval::text

#endif
