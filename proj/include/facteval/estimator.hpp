#ifndef FACTEVAL_ESTIMATOR_HPP
#define FACTEVAL_ESTIMATOR_HPP

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "facteval/atomizer.hpp"
#include "facteval/lm.hpp"
#include "facteval/retrieval.hpp"

namespace facteval {

enum class EstimatorVariant {
    no_context,
    self_check,
    retrieve_lm,
    np,
    retrieve_lm_plus_np,
};

EstimatorVariant parse_variant(const std::string& name);
std::string variant_name(EstimatorVariant variant);

struct Verdict {
    AtomicFact fact;
    bool supported = false;
    EstimatorVariant method = EstimatorVariant::no_context;
    std::vector<ScoredPassage> evidence;  // non-empty iff the method retrieves
    std::optional<double> np_probability;
    bool missing_page = false;  // topic had no page; fact treated as unverifiable
};

struct EstimatorConfig {
    EstimatorVariant variant = EstimatorVariant::retrieve_lm;
    int k = 5;
    double np_threshold = 0.3;
    int self_check_min_samples = 3;

    /// Throws UsageError listing every violated constraint.
    void validate() const;
};

/// Masked-token probability of a fact token given the topic's page.
/// Pluggable: the reference nonparametric masked LM is a neural model and
/// out of scope, so deployments may plug their own scorer.
class NpScorer {
public:
    virtual ~NpScorer() = default;
    /// One probability in [0,1] per token, in token order.
    virtual std::vector<double> token_probabilities(const std::vector<std::string>& tokens,
                                                    const AtomicFact& fact,
                                                    const std::string& topic) = 0;
};

/// Default surrogate, a stand-in for a neural masked-LM scorer: a token
/// scores 1 when it appears in the top-k BM25 passages retrieved for the
/// fact from the topic page, and its add-half smoothed corpus frequency
/// (count + 0.5) / (total + 0.5 * vocabulary) otherwise.
class RetrievalFrequencyNpScorer : public NpScorer {
public:
    RetrievalFrequencyNpScorer(const Index& index, int k);
    std::vector<double> token_probabilities(const std::vector<std::string>& tokens,
                                            const AtomicFact& fact,
                                            const std::string& topic) override;

private:
    const Index& index_;
    int k_;
};

/// Prompt is exactly the fact text, one space, "True or False?".
Verdict judge_no_context(const AtomicFact& fact, LmGateway& gateway,
                         const std::string& model_id);

/// One judgment per subject-LM sample (prompt = sample, blank line, fact,
/// " True or False?"); supported on a strict majority of true votes, ties
/// resolve to not supported. Throws DataError on an empty sample list.
Verdict judge_self_check(const AtomicFact& fact, const std::vector<std::string>& samples,
                         LmGateway& gateway, const std::string& model_id);

/// Builds the retrieval prompt for already-retrieved evidence. Exposed so
/// prompt construction is testable against golden files.
std::string build_retrieve_prompt(const AtomicFact& fact,
                                  const std::vector<ScoredPassage>& evidence);

/// Top-k page-scoped retrieval, then an LM judgment over the passages. An
/// unknown topic yields supported=false with the missing-page flag instead
/// of an error, so batch scoring over corpora with coverage gaps completes.
Verdict judge_retrieve_lm(const AtomicFact& fact, const std::string& topic,
                          const Index& index, LmGateway& gateway,
                          const std::string& model_id, int k);

/// Mean masked-token probability over the fact's content tokens
/// (lowercased alphanumeric tokens minus stopwords). Throws DataError when
/// the fact has no content tokens.
double np_probability(const AtomicFact& fact, const std::string& topic, NpScorer& scorer);

/// Supported iff np_probability >= threshold (boundary included, so the
/// threshold reads as a minimum support level).
Verdict judge_np(const AtomicFact& fact, const std::string& topic, NpScorer& scorer,
                 double threshold, const Index& index);

/// Supported only when both the retrieval judgment and the NP judgment
/// say supported; carries both the evidence and the NP probability.
Verdict judge_ensemble(const AtomicFact& fact, const std::string& topic, const Index& index,
                       LmGateway& gateway, const std::string& model_id, NpScorer& scorer,
                       const EstimatorConfig& config);

struct JudgeInputs {
    const Index* index = nullptr;          // retrieval variants
    LmGateway* gateway = nullptr;          // LM variants
    std::string model_id;
    NpScorer* np_scorer = nullptr;         // NP variants
    const std::vector<std::string>* self_check_samples = nullptr;
};

/// Judges a batch on up to `threads` workers. Verdict order equals fact
/// order regardless of completion order.
std::vector<Verdict> judge_batch(const std::vector<AtomicFact>& facts,
                                 const std::vector<std::string>& topics,
                                 const EstimatorConfig& config, const JudgeInputs& inputs,
                                 int threads = 1);

}  // namespace facteval

#endif
