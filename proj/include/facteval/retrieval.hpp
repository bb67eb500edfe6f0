#ifndef FACTEVAL_RETRIEVAL_HPP
#define FACTEVAL_RETRIEVAL_HPP

#include <string>
#include <unordered_map>
#include <vector>

#include "facteval/corpus.hpp"

namespace facteval {

struct ScoredPassage {
    Passage passage;
    double score = 0.0;
};

struct Bm25Params {
    double k1 = 0.9;
    double b = 0.4;
};

/// BM25 index over every passage of a store, with retrieval restricted to
/// a single document's passages.
///
/// Scoring conventions (fixed so an independent implementation can match
/// bit for bit):
///   - terms are match tokens (lowercased alphanumeric runs), no stemming
///     and no stopword removal;
///   - idf(t) = ln(1 + (N - df + 0.5) / (df + 0.5)) over the whole corpus
///     (N = total passages); the page restriction filters candidates only;
///   - passage length = match-token count; avgdl over the whole corpus;
///   - repeated query tokens contribute once per occurrence;
///   - ties break toward the smaller passage index.
class Index {
public:
    /// Covers every passage of every document; deterministic given the
    /// store. Throws DataError on an empty store.
    static Index build(const DocumentStore& store, Bm25Params params = {});

    /// Top-k BM25 passages of `title`'s page for `query`, sorted by
    /// descending score. Returns min(k, passages-in-page) results. A query
    /// that is empty after tokenization yields the first k passages of the
    /// page in index order with score 0. Throws TitleNotFound.
    std::vector<ScoredPassage> retrieve(const std::string& title,
                                        const std::string& query, int k) const;

    bool has_title(const std::string& title) const;
    const std::vector<Passage>& page_passages(const std::string& title) const;
    const std::vector<std::string>& titles() const { return titles_; }

    std::size_t passage_count() const { return passages_.size(); }
    double average_passage_length() const { return avg_length_; }
    int document_frequency(const std::string& term) const;

    /// Corpus-level term statistics (used by the NP frequency surrogate).
    long long corpus_term_count(const std::string& term) const;
    long long total_corpus_tokens() const { return total_tokens_; }
    std::size_t vocabulary_size() const { return doc_freq_.size(); }

    const Bm25Params& params() const { return params_; }
    int max_tokens() const { return max_tokens_; }

    /// Versioned binary persistence (magic "FEIX" + version byte); term
    /// statistics are rebuilt deterministically on load. Format notes in
    /// the README.
    void save(const std::string& path) const;
    static Index load(const std::string& path);

private:
    Index() = default;
    void finalize_statistics();

    Bm25Params params_;
    int max_tokens_ = DocumentStore::kDefaultMaxTokens;
    std::vector<Passage> passages_;                       // global id order
    std::vector<std::unordered_map<std::string, int>> term_counts_;  // per passage
    std::vector<int> lengths_;                            // match-token counts
    double avg_length_ = 0.0;
    long long total_tokens_ = 0;
    std::unordered_map<std::string, int> doc_freq_;
    std::unordered_map<std::string, long long> corpus_term_counts_;
    std::vector<std::string> titles_;
    std::unordered_map<std::string, std::vector<std::size_t>> page_ids_;
    std::unordered_map<std::string, std::vector<Passage>> page_passages_;
};

}  // namespace facteval

#endif
