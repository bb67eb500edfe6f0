#ifndef FACTEVAL_EDIT_EVAL_HPP
#define FACTEVAL_EDIT_EVAL_HPP

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "facteval/corpus.hpp"

namespace facteval {

struct EditRecord {
    std::string input;       // sentence to be corrected
    std::string gold_edit;   // human-written correction
    std::string model_edit;  // editor output under evaluation
    std::vector<std::pair<std::string, bool>> fact_labels;  // (fact text, is true)
};

struct EditMetrics {
    double err_loc = 0.0;                 // macro-averaged over records
    std::optional<double> edit_corr;      // absent when no gold edit adds tokens
    double sim_al = 0.0;
    std::size_t records = 0;
    std::size_t edit_corr_records = 0;    // records where EditCorr is defined
};

/// Lowercase, strip punctuation, split on whitespace, drop stopwords.
/// Shared normalization for all three editing metrics.
std::vector<std::string> normalize_tokens(const std::string& sentence);

/// Error localization: per record, each normalized input token is marked
/// Preserved iff it appears in the (gold / model) edit's token set, and F1
/// is computed between the two preservation strings with Not-Preserved as
/// the positive class. F1 scores are computed per sentence, then averaged.
/// Records whose normalized input is empty are skipped with a warning.
double err_loc(const std::vector<EditRecord>& records);

/// Set-F1 over tokens the edit newly introduces relative to the input.
/// Absent when the gold edit adds no new tokens; 0 when only the model
/// adds none.
std::optional<double> edit_corr(const EditRecord& record);

class SimilarityScorer {
public:
    virtual ~SimilarityScorer() = default;
    /// Semantic similarity in [0,1].
    virtual double similarity(const std::string& a, const std::string& b) = 0;
};

/// Default surrogate for the paraphrase embeddings: cosine similarity over
/// normalized-token count vectors (non-negative, so already in [0,1]).
/// Two empty token lists score 1, exactly one empty scores 0.
class TokenCosineSimilarity : public SimilarityScorer {
public:
    double similarity(const std::string& a, const std::string& b) override;
};

/// SimAl = max(0, (s(G,E) - s(G,X)) / (1 - s(G,X))); when the gold edit
/// equals the input (s(G,X) ~ 1) the raw s(G,E) is returned instead.
double sim_al(const EditRecord& record, SimilarityScorer& sim);

/// Aggregate all three metrics over a record set.
EditMetrics evaluate_edits(const std::vector<EditRecord>& records, SimilarityScorer& sim);

/// Editor prompt: four exemplars (input, optional fact lines, gold edit),
/// then up to three retrieved passages, then the input block ending in
/// "Edit:". Layout is frozen by golden files. Throws DataError on a wrong
/// exemplar count or more than three passages.
std::string build_editor_prompt(const EditRecord& record,
                                const std::vector<Passage>* passages, bool use_facts,
                                const std::vector<EditRecord>& exemplars);

}  // namespace facteval

#endif
