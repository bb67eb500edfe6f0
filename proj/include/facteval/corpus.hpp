#ifndef FACTEVAL_CORPUS_HPP
#define FACTEVAL_CORPUS_HPP

#include <string>
#include <unordered_map>
#include <vector>

namespace facteval {

struct Document {
    std::string title;  // unique key within a store
    std::string text;
};

struct Passage {
    std::string doc_title;
    int index = 0;  // 0-based, contiguous within the document
    std::string text;
    int token_count = 0;  // whitespace tokens
};

/// Greedy sentence packing: sentences are appended to the current passage
/// until adding the next one would push it past max_tokens. A single
/// sentence longer than max_tokens becomes its own passage(s), split at
/// whitespace-token boundaries. Every token of the document lands in
/// exactly one passage; an empty document yields an empty list.
std::vector<Passage> chunk_document(const Document& doc, int max_tokens);

/// Immutable titled document corpus, chunked into bounded-size passages
/// at load time. Safe to share across concurrent readers.
class DocumentStore {
public:
    static constexpr int kDefaultMaxTokens = 256;

    explicit DocumentStore(int max_tokens = kDefaultMaxTokens);

    /// Throws DataError on duplicate titles or invariant violations.
    void add_document(Document doc);

    bool has_title(const std::string& title) const;

    /// Passages in index order. Throws TitleNotFound for unknown titles;
    /// matching is exact and case-sensitive.
    const std::vector<Passage>& get_passages(const std::string& title) const;

    const std::vector<std::string>& titles() const { return titles_; }
    std::size_t size() const { return titles_.size(); }
    bool empty() const { return titles_.empty(); }
    int max_tokens() const { return max_tokens_; }

private:
    int max_tokens_;
    std::vector<std::string> titles_;  // load order
    std::unordered_map<std::string, std::vector<Passage>> passages_by_title_;
};

/// Loads a newline-delimited UTF-8 record file with `title` and `text`
/// string fields. Malformed records report their line number; duplicate
/// titles and empty files are errors.
DocumentStore load_corpus(const std::string& path, int max_tokens = DocumentStore::kDefaultMaxTokens);

}  // namespace facteval

#endif
